#pragma once

#include <cstdint>
#include <vector>

#include "citescope/article.hpp"

namespace citescope {

// Desk-scale stand-in for a real repository: uniform background on the unit
// sphere plus planted clusters with boosted citation rates. A given spec
// always produces a byte-identical corpus.
struct SynthSpec {
    uint32_t dim = 4;
    uint32_t n_background = 0;
    uint32_t n_clusters = 0;
    uint32_t n_per_cluster = 0;
    // Expected chordal distance of a member from its cluster center; members
    // are capped at 3x this radius.
    double cluster_radius = 0.05;
    std::vector<Month> cluster_birth_months;
    // Member publication months spread uniformly over [birth, birth + growth).
    int growth_window_months = 12;
    // Background publication months, inclusive range.
    Month start = Month::of(2015, 1);
    Month end = Month::of(2024, 12);
    // Pareto tail exponent for citation counts; must be > 1.
    double citation_alpha = 2.5;
    // Multiplier on cluster-member citation rates; 1 = background-identical.
    double boost_in_clusters = 1.0;
    MetricKind metric = MetricKind::EuclideanOnUnitNorm;
    uint64_t seed = 0;
};

struct PlantedCluster {
    std::vector<float> center;
    Month birth;
};

struct GroundTruth {
    std::vector<PlantedCluster> clusters;
};

// The generated corpus records its ground truth (planted centers and birth
// months) in provenance as JSON, so oracle tests can read back what was
// planted.
Corpus synth_corpus(const SynthSpec& spec);

GroundTruth parse_ground_truth(const std::string& provenance);
std::string ground_truth_json(const GroundTruth& gt);

}  // namespace citescope
