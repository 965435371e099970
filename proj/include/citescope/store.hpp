#pragma once

#include <filesystem>
#include <stdexcept>

#include "citescope/article.hpp"

namespace citescope {

// Raised on malformed stores; the message names the offending file or record.
struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// On-disk layout under store_path/:
//   vectors.lsc      "LSCV" magic, u32 version=1, u32 dim, u64 count, then
//                    count*dim IEEE-754 f32, little-endian, row-major in
//                    (published, id) order
//   meta.jsonl       one object per article, same order:
//                    {id, published:"YYYY-MM-DD", citations, has_citation_data, source}
//   provenance.json  corpus metric and provenance text
//
// Writing the same corpus twice yields identical bytes. Non-finite
// coordinates are rejected before any file is created.
void store_write(const Corpus& corpus, const std::filesystem::path& store_path);

// Inverse of store_write; a count mismatch between vectors.lsc and
// meta.jsonl, a bad header, or a duplicate id is a StoreError.
Corpus load_corpus(const std::filesystem::path& store_path);

}  // namespace citescope
