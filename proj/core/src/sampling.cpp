#include "crowdorg/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace crowdorg {

namespace {

ItemSet draw_without_replacement(std::vector<ItemId> pool, std::size_t count, Rng& rng) {
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)};
}

ItemSet draw_kernel(const Hierarchy& t, Rng& rng) {
  ItemSet kernel;
  for (NodeId leaf : t.leaves()) {
    const auto& items = t.node(leaf).items;
    if (items.empty()) throw Error("cannot draw a kernel item from empty leaf " + std::to_string(leaf));
    std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
    kernel.insert(*std::next(items.begin(), static_cast<std::ptrdiff_t>(pick(rng))));
  }
  return kernel;
}

std::vector<ItemId> fresh_items(const Hierarchy* t, const ItemCorpus& corpus, const ItemSet& used) {
  std::vector<ItemId> out;
  for (const auto& item : corpus.items()) {
    if (used.contains(item.id)) continue;
    if (t && t->covered_items.contains(item.id)) continue;
    out.push_back(item.id);
  }
  return out;
}

}  // namespace

double coverage_lower_bound(int n, int f) {
  if (n < 1) throw Error("coverage_lower_bound: n must be at least 1");
  if (f < 0) throw Error("coverage_lower_bound: f must be non-negative");
  double n1 = n + 1.0;
  double v = 1.0 - (f / n1) * std::pow(1.0 - 1.0 / n1, n);
  return std::clamp(v, 0.0, 1.0);
}

double variance_upper_bound(int n, int f) {
  double c = coverage_lower_bound(n, f);
  return 1.0 - c * c;
}

CoverageReport coverage_report(int n, int f) {
  return {coverage_lower_bound(n, f), variance_upper_bound(n, f), n, f};
}

int solve_sample_size(double delta, int f) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("solve_sample_size: delta must lie in (0, 1)");
  if (f < 0) throw Error("solve_sample_size: f must be non-negative");
  if (f == 0) return 0;
  // the bound increases with n; gallop then bisect
  int hi = 1;
  while (coverage_lower_bound(hi, f) < delta) {
    if (hi > (1 << 29)) throw Error("solve_sample_size: delta too close to 1");
    hi *= 2;
  }
  int lo = hi / 2;  // bound(lo) < delta unless lo == 0
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (coverage_lower_bound(mid, f) >= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

int solve_iterations(int n, int f, int h) {
  if (h <= f) throw Error("solve_iterations: h must exceed f");
  if (n <= h) return 1;
  int step = h - f;
  return 1 + (n - h + step - 1) / step;
}

long long planned_clustering_tasks(int n, int f, int h, int m) {
  if (h <= f) throw Error("planned_clustering_tasks: h must exceed f");
  long long rounds = n <= f ? 0 : (static_cast<long long>(n) - f + (h - f) - 1) / (h - f);
  return static_cast<long long>(m) * rounds;
}

Sample generate_sample(const Hierarchy* t, int h, const ItemCorpus& corpus, const ItemSet& used, Rng& rng,
                       int iteration, std::string sample_id) {
  if (h < 1) throw Error("generate_sample: h must be positive");
  Sample s;
  s.sample_id = std::move(sample_id);
  s.iteration = iteration;
  if (t) s.kernel = draw_kernel(*t, rng);
  if (static_cast<int>(s.kernel.size()) >= h) {
    throw Error("generate_sample: kernel of " + std::to_string(s.kernel.size()) +
                " items leaves no room in a sample of " + std::to_string(h) + "; split the kernel");
  }
  s.items = draw_without_replacement(fresh_items(t, corpus, used), static_cast<std::size_t>(h) - s.kernel.size(), rng);
  s.items.insert(s.kernel.begin(), s.kernel.end());
  return s;
}

std::vector<ItemSet> split_kernel(const ItemSet& kernel, int parts) {
  if (parts < 1) throw Error("split_kernel: parts must be positive");
  if (static_cast<std::size_t>(parts) > kernel.size()) {
    throw Error("split_kernel: cannot split " + std::to_string(kernel.size()) + " items into " +
                std::to_string(parts) + " parts");
  }
  std::vector<ItemSet> out(static_cast<std::size_t>(parts));
  std::size_t base = kernel.size() / static_cast<std::size_t>(parts);
  std::size_t extra = kernel.size() % static_cast<std::size_t>(parts);
  auto it = kernel.begin();
  for (std::size_t p = 0; p < out.size(); ++p) {
    std::size_t size = base + (p < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) out[p].insert(*it++);
  }
  return out;
}

std::vector<Sample> generate_iteration_samples(const Hierarchy* t, int h, int max_kernel, const ItemCorpus& corpus,
                                               const ItemSet& used, Rng& rng, int iteration,
                                               const std::string& id_prefix) {
  max_kernel = std::clamp(max_kernel, 1, h - 1);
  ItemSet kernel;
  if (t) kernel = draw_kernel(*t, rng);
  int parts = kernel.empty() ? 1 : static_cast<int>((kernel.size() + max_kernel - 1) / max_kernel);
  std::vector<ItemSet> portions = parts > 1 ? split_kernel(kernel, parts) : std::vector<ItemSet>{kernel};
  std::size_t largest = 0;
  for (const auto& p : portions) largest = std::max(largest, p.size());

  ItemSet fresh = draw_without_replacement(fresh_items(t, corpus, used), static_cast<std::size_t>(h) - largest, rng);
  std::vector<Sample> out;
  for (std::size_t p = 0; p < portions.size(); ++p) {
    Sample s;
    s.sample_id = id_prefix + "-" + std::to_string(iteration) + (parts > 1 ? "." + std::to_string(p + 1) : "");
    s.iteration = iteration;
    s.kernel = portions[p];
    s.items = fresh;
    s.items.insert(s.kernel.begin(), s.kernel.end());
    out.push_back(std::move(s));
  }
  return out;
}

double sampled_frontier_coverage(const std::vector<double>& concept_probabilities, int n, Rng& rng) {
  if (concept_probabilities.empty()) throw Error("sampled_frontier_coverage: no concepts");
  std::discrete_distribution<std::size_t> draw(concept_probabilities.begin(), concept_probabilities.end());
  std::vector<bool> seen(concept_probabilities.size(), false);
  for (int i = 0; i < n; ++i) seen[draw(rng)] = true;
  double total = 0.0, covered = 0.0;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    total += concept_probabilities[i];
    if (seen[i]) covered += concept_probabilities[i];
  }
  return covered / total;
}

}  // namespace crowdorg
