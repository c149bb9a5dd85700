#pragma once

#include <random>
#include <string>
#include <vector>

#include "crowdorg/model.hpp"

namespace crowdorg {

using Rng = std::mt19937_64;

struct CoverageReport {
  double expected_coverage_lower_bound = 0.0;
  double variance_upper_bound = 0.0;
  int n = 0;
  int f = 0;
};

/// 1 - (f/(n+1)) (1 - 1/(n+1))^n, clamped to [0, 1] (the raw expression is
/// negative when f is large relative to n).
double coverage_lower_bound(int n, int f);
/// 1 - coverage_lower_bound(n, f)^2.
double variance_upper_bound(int n, int f);
CoverageReport coverage_report(int n, int f);

/// Smallest n whose coverage bound reaches delta; 0 when f = 0.
int solve_sample_size(double delta, int f);
/// Smallest tau with h + (h - f)(tau - 1) >= n. Throws when h <= f.
int solve_iterations(int n, int f, int h);
/// m * ceil((n - f) / (h - f)), the planned number of clustering assignments.
long long planned_clustering_tasks(int n, int f, int h, int m);

/// One sample: a kernel of one random item per leaf of `t` (none when `t` is
/// null) topped up with new items drawn from the corpus, skipping anything in
/// `t` or `used`. Throws when the kernel leaves no room for new items.
Sample generate_sample(const Hierarchy* t, int h, const ItemCorpus& corpus, const ItemSet& used, Rng& rng,
                       int iteration = 1, std::string sample_id = {});

/// Partition of `kernel` (ascending order) into `parts` contiguous portions
/// whose sizes differ by at most one.
std::vector<ItemSet> split_kernel(const ItemSet& kernel, int parts);

/// The samples of one iteration. When the kernel exceeds `max_kernel` items it
/// is split into portions of at most `max_kernel`, and every portion is paired
/// with the same new items.
std::vector<Sample> generate_iteration_samples(const Hierarchy* t, int h, int max_kernel, const ItemCorpus& corpus,
                                               const ItemSet& used, Rng& rng, int iteration,
                                               const std::string& id_prefix);

/// Fraction of probability mass in the concepts hit by `n` independent draws
/// from `concept_probabilities`.
double sampled_frontier_coverage(const std::vector<double>& concept_probabilities, int n, Rng& rng);

}  // namespace crowdorg
