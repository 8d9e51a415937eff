#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "halp/bench.hpp"
#include "halp/halp.hpp"

namespace halp {

/// JSON problem document: model, default basis, discount. Expressions are
/// stored as S-expression text over variable names; numbers round-trip
/// exactly.
std::string problem_to_json(const Benchmark& b);
/// Throws ConfigError on malformed documents.
Benchmark problem_from_json(std::string_view text);

/// Everything needed to replay policy evaluation without re-solving.
struct SolutionArchive {
    std::string problem;  ///< benchmark id or problem file path
    std::string solver;   ///< eps, mc, mcmc
    std::vector<std::pair<std::string, std::string>> config;
    double gamma = 0.95;
    std::uint64_t seed = 0;
    std::vector<double> weights;
    double objective = 0.0;
    int iterations = 0;
    std::size_t cuts = 0;
    std::string status;
    std::vector<std::vector<double>> cut_provenance;
    std::optional<double> seconds;  ///< wall clock, only when timing is recorded
};

SolutionArchive make_archive(const HalpSolution& s);

std::string archive_to_json(const SolutionArchive& a);
SolutionArchive archive_from_json(std::string_view text);

/// Write through a temporary file and rename into place.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

}  // namespace halp
