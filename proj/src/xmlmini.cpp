#include "citescope/xmlmini.hpp"

namespace citescope::xmlmini {

namespace {

// Position just past the matching open tag, or npos. Matches "<tag>" and
// "<tag attr...>"; rejects "<tagger>".
size_t find_open(std::string_view xml, std::string_view tag, size_t from, size_t* content_begin) {
    const std::string needle = "<" + std::string(tag);
    size_t pos = from;
    while ((pos = xml.find(needle, pos)) != std::string_view::npos) {
        const size_t after = pos + needle.size();
        if (after < xml.size() && (xml[after] == '>' || xml[after] == ' ' || xml[after] == '\t' ||
                                   xml[after] == '\n' || xml[after] == '\r' || xml[after] == '/')) {
            const size_t close = xml.find('>', after);
            if (close == std::string_view::npos) return std::string_view::npos;
            if (xml[close - 1] == '/') {  // self-closing: empty content
                *content_begin = close;   // caller sees begin == end sentinel via close tag search
                return pos;
            }
            *content_begin = close + 1;
            return pos;
        }
        pos += needle.size();
    }
    return std::string_view::npos;
}

}  // namespace

std::vector<std::string_view> blocks(std::string_view xml, std::string_view tag) {
    std::vector<std::string_view> out;
    const std::string close = "</" + std::string(tag) + ">";
    size_t pos = 0;
    while (true) {
        size_t content = 0;
        const size_t open = find_open(xml, tag, pos, &content);
        if (open == std::string_view::npos) break;
        if (xml[content] == '>' && content > 0 && xml[content - 1] == '/') {
            // self-closing
            out.push_back(xml.substr(content, 0));
            pos = content + 1;
            continue;
        }
        const size_t end = xml.find(close, content);
        if (end == std::string_view::npos) break;
        out.push_back(xml.substr(content, end - content));
        pos = end + close.size();
    }
    return out;
}

std::optional<std::string_view> first_block(std::string_view xml, std::string_view tag) {
    auto all = blocks(xml, tag);
    if (all.empty()) return std::nullopt;
    return all.front();
}

std::optional<std::string_view> first_open_tag(std::string_view xml, std::string_view tag) {
    size_t content = 0;
    const size_t open = find_open(xml, tag, 0, &content);
    if (open == std::string_view::npos) return std::nullopt;
    const size_t gt = xml.find('>', open);
    if (gt == std::string_view::npos) return std::nullopt;
    return xml.substr(open, gt - open + 1);
}

std::string unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        const size_t semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += s[i++];
            continue;
        }
        const std::string_view ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (!ent.empty() && ent[0] == '#') {
            long code = 0;
            bool ok = true;
            if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
                for (size_t k = 2; k < ent.size(); ++k) {
                    const char c = ent[k];
                    int d;
                    if (c >= '0' && c <= '9') d = c - '0';
                    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
                    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
                    else { ok = false; break; }
                    code = code * 16 + d;
                }
                ok = ok && ent.size() > 2;
            } else {
                for (size_t k = 1; k < ent.size(); ++k) {
                    if (ent[k] < '0' || ent[k] > '9') { ok = false; break; }
                    code = code * 10 + (ent[k] - '0');
                }
                ok = ok && ent.size() > 1;
            }
            if (!ok || code <= 0 || code > 0x10ffff) {
                out += s[i++];
                continue;
            }
            // UTF-8 encode.
            if (code < 0x80) out += static_cast<char>(code);
            else if (code < 0x800) {
                out += static_cast<char>(0xc0 | (code >> 6));
                out += static_cast<char>(0x80 | (code & 0x3f));
            } else if (code < 0x10000) {
                out += static_cast<char>(0xe0 | (code >> 12));
                out += static_cast<char>(0x80 | ((code >> 6) & 0x3f));
                out += static_cast<char>(0x80 | (code & 0x3f));
            } else {
                out += static_cast<char>(0xf0 | (code >> 18));
                out += static_cast<char>(0x80 | ((code >> 12) & 0x3f));
                out += static_cast<char>(0x80 | ((code >> 6) & 0x3f));
                out += static_cast<char>(0x80 | (code & 0x3f));
            }
        } else {
            out += s[i];
            ++i;
            continue;
        }
        i = semi + 1;
    }
    return out;
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // leading whitespace dropped
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!in_ws) out += ' ';
            in_ws = true;
        } else {
            out += c;
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string text(std::string_view s) { return collapse_ws(unescape(s)); }

}  // namespace citescope::xmlmini
