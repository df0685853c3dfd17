#include "modgraph/suites.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "modgraph/encoder.hpp"
#include "modgraph/graph.hpp"
#include "modgraph/oracle.hpp"
#include "modgraph/random.hpp"
#include "modgraph/reports.hpp"

namespace modgraph::oracle {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix random_distances(std::size_t m, Rng& rng) {
  Matrix d(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) d(i, j) = d(j, i) = rng.uniform(0.01, 1.0);
  return d;
}

}  // namespace

SuiteResult gradient_suite(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  const EncoderSpec sa{6, {5}, 4, Activation::kTanh};
  const EncoderSpec sb{3, {5}, 4, Activation::kTanh};
  const auto pa = init_encoder(sa, derive_seed(seed, 1));
  const auto pb = init_encoder(sb, derive_seed(seed, 2));
  const Matrix xa = rng.uniform_matrix(8, 6, -2.0, 2.0);
  const Matrix xb = rng.uniform_matrix(8, 3, -2.0, 2.0);
  const auto problem = edge_loss_problem(pa, pb, xa, xb, 0.5);
  const double err = gradient_check(problem.objective, problem.point, 1e-5);
  SuiteResult r{"gradient", err < 1e-4, "max relative error " + format_number(err) + " (limit 1e-4)", 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult cayley_suite() {
  const auto t0 = Clock::now();
  SuiteResult r{"cayley", true, {}, 0.0};
  for (std::size_t m = 2; m <= kMaxEnumerationNodes; ++m) {
    Matrix d(m, m, 1.0);
    const auto trees = enumerate_spanning_trees(EdgeWeights::from_distances(d)).trees.size();
    const auto expected = static_cast<std::size_t>(std::llround(std::pow(double(m), double(m) - 2.0)));
    r.detail += (m > 2 ? ", " : "") + std::string("m=") + std::to_string(m) + ":" + std::to_string(trees);
    if (trees != expected) r.passed = false;
  }
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult mst_suite(std::uint64_t seed, const std::optional<std::filesystem::path>& csv) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  std::ofstream out;
  if (csv) {
    out.open(*csv);
    out << "m,trial,kruskal_total,enumeration_minimum,edges,exact\n";
  }
  std::size_t failures = 0;
  std::size_t checked = 0;
  for (std::size_t m = 3; m <= kMaxEnumerationNodes; ++m) {
    for (std::size_t trial = 0; trial < 100; ++trial) {
      const auto w = EdgeWeights::from_distances(random_distances(m, rng));
      const auto mst = kruskal_mst(w);
      const double kt = total_distance(mst.edges);
      const double et = enumerate_spanning_trees(w).minimum.total;
      DisjointSets sets(m);
      bool acyclic = true;
      for (const auto& e : mst.edges) acyclic = sets.unite(e.i, e.j) && acyclic;
      const bool ok = kt == et && mst.edges.size() == m - 1 && acyclic;
      failures += ok ? 0 : 1;
      ++checked;
      if (csv) {
        out << m << ',' << trial << ',' << format_number(kt) << ',' << format_number(et) << ','
            << mst.edges.size() << ',' << (ok ? 1 : 0) << '\n';
      }
    }
  }
  SuiteResult r{"mst", failures == 0,
                std::to_string(checked - failures) + "/" + std::to_string(checked) + " exact matches", 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult arrangement_suite(std::uint64_t seed, const std::optional<std::filesystem::path>& csv) {
  const auto t0 = Clock::now();
  std::ofstream out;
  if (csv) {
    out.open(*csv);
    out << "draw,grouped_loss,mixed_loss,gap\n";
  }
  const std::set<std::size_t> gi{0, 1, 2};
  const std::set<std::size_t> gj{3, 4, 5};
  std::size_t wins = 0;
  double worst_mismatch = 0.0;
  for (std::size_t draw = 0; draw < 100; ++draw) {
    const auto fixture = planted_arrangement_fixture(16, 8, 0.1, derive_seed(seed, draw));
    const auto gap = arrangement_loss_gap(fixture, gi, gj, 0.1);
    const auto naive = arrangement_loss_gap(fixture, gi, gj, 0.1, true);
    worst_mismatch = std::max({worst_mismatch, std::abs(gap.grouped - naive.grouped),
                               std::abs(gap.mixed - naive.mixed)});
    if (gap.grouped < gap.mixed) ++wins;
    if (csv) {
      out << draw << ',' << format_number(gap.grouped) << ',' << format_number(gap.mixed) << ','
          << format_number(gap.mixed - gap.grouped) << '\n';
    }
  }
  SuiteResult r{"arrangement", wins >= 95 && worst_mismatch <= 1e-12,
                std::to_string(wins) + "/100 draws grouped < mixed; naive mismatch " +
                    format_number(worst_mismatch),
                0.0};
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<SuiteResult> run_all_suites(std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir) {
  auto path = [&](const char* name) -> std::optional<std::filesystem::path> {
    if (!out_dir) return std::nullopt;
    return *out_dir / name;
  };
  return {gradient_suite(seed), cayley_suite(), mst_suite(seed, path("mst_check.csv")),
          arrangement_suite(seed, path("arrangement_gap.csv"))};
}

}  // namespace modgraph::oracle
