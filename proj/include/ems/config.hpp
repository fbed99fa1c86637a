#pragma once

// INI run configuration. Sections: [data] [ethics] [mapping] [experiment] and
// one per model family ([lr] [nb] [rf] [svm] [nn]). Unknown sections or keys
// are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ems/dataset.hpp"
#include "ems/harness.hpp"

namespace ems::config {

struct RunConfig {
    std::filesystem::path data_path;             // resolved against the config file's directory
    std::optional<std::uint64_t> synthetic_seed;  // generate data in memory instead of reading data_path
    std::optional<std::string> expected_digest;   // sha256 of the dataset bytes, checked on load
    data::Schema schema = data::Schema::Admissions;
    std::string philosophy = "principlism";  // informational once weights are resolved
    data::MappingConfig mapping;
    harness::MatrixRequest matrix;  // settings hold every family
    std::filesystem::path out_dir;  // empty: caller decides

    static RunConfig defaults(data::Schema schema);
};

// Throws ConfigError naming "section.key".
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Complete INI text with every effective value, the seed and the dataset digest.
// Parsing it back reproduces the run.
std::string snapshot(const RunConfig& cfg, std::string_view dataset_digest);

struct LoadedData {
    std::string bytes;
    std::string digest;
    data::AnnotatedDataset dataset;
};

// Reads (or synthesizes) the dataset, verifies the digest if one is pinned,
// oversamples if requested and annotates.
LoadedData load_dataset(const RunConfig& cfg);

}  // namespace ems::config
