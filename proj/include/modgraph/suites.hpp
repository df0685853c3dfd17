#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace modgraph::oracle {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Edge loss through two 2-layer tanh encoders (batch 8, d = 4) against
/// central differences at h = 1e-5; passes below 1e-4.
SuiteResult gradient_suite(std::uint64_t seed);

/// Prüfer enumeration count equals m^(m-2) for m in 2..7.
SuiteResult cayley_suite();

/// 100 random symmetric distance matrices per m in 3..7: Kruskal total equals
/// the enumeration minimum exactly, m-1 edges, acyclic.
SuiteResult mst_suite(std::uint64_t seed, const std::optional<std::filesystem::path>& csv = std::nullopt);

/// Planted 3+3 fixture at τ = 0.1 over 100 draws: grouped < mixed in >= 95,
/// and the tape and double-loop losses agree within 1e-12.
SuiteResult arrangement_suite(std::uint64_t seed, const std::optional<std::filesystem::path>& csv = std::nullopt);

/// All of the above; CSV reports land in `out_dir` when given.
std::vector<SuiteResult> run_all_suites(std::uint64_t seed,
                                        const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace modgraph::oracle
