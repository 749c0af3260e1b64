// Copyright 2026 The AdaptLeak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adaptleak/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "adaptleak/error.hpp"
#include "adaptleak/rng.hpp"

namespace adaptleak {

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> columns) const {
  FeatureMatrix out;
  out.rows = rows;
  out.cols = columns.size();
  for (auto c : columns) out.names.push_back(c < names.size() ? names[c] : "f" + std::to_string(c));
  out.data.reserve(rows * out.cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto c : columns) out.data.push_back(at(r, c));
  }
  return out;
}

FeatureMatrix make_matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                          std::vector<std::string> names) {
  if (data.size() != rows * cols) throw Error(ErrorCode::kLengthMismatch, "matrix data size mismatch");
  FeatureMatrix x;
  x.rows = rows;
  x.cols = cols;
  x.data = std::move(data);
  if (names.empty()) {
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  }
  x.names = std::move(names);
  return x;
}

FeatureMatrix build_feature_matrix(const ActionTimeline& observed, const FeatureOptions& opts) {
  const std::size_t rows = static_cast<std::size_t>(observed.horizon());
  const std::size_t width = observed.width();
  FeatureMatrix x;
  x.rows = rows;
  x.names = observed.names;
  if (opts.time_of_day) x.names.emplace_back("time_of_day");
  if (opts.day_of_week) x.names.emplace_back("day_of_week");
  x.cols = x.names.size();
  if (x.cols == 0) throw Error(ErrorCode::kLengthMismatch, "feature matrix needs at least one column");
  x.data.assign(rows * x.cols, 0.0);

  for (std::size_t c = 0; c < width; ++c) {
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    for (std::size_t r = 0; r < rows; ++r) {
      lo = std::min(lo, observed.at(static_cast<Tick>(r), c));
      hi = std::max(hi, observed.at(static_cast<Tick>(r), c));
    }
    const double span = static_cast<double>(hi) - static_cast<double>(lo);
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = static_cast<double>(observed.at(static_cast<Tick>(r), c)) - static_cast<double>(lo);
      x.data[r * x.cols + c] = span > 0.0 ? v / span : 0.0;
    }
  }
  const Tick step = std::max<Tick>(1, opts.time_resolution);
  for (std::size_t r = 0; r < rows; ++r) {
    const Tick t = opts.start_tick + static_cast<Tick>(r);
    std::size_t c = width;
    if (opts.time_of_day) {
      const Tick minute = (t % kTicksPerDay) / step * step;
      x.data[r * x.cols + c++] = static_cast<double>(minute) / static_cast<double>(kTicksPerDay);
    }
    if (opts.day_of_week) {
      x.data[r * x.cols + c] = static_cast<double>((t / kTicksPerDay) % 7) / 6.0;
    }
  }
  return x;
}

namespace {

// Distinct rows of a matrix with multiplicities. Identical rows always land
// in the same cluster, so clustering the distinct rows with weights is the
// same computation as clustering every tick.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> weight;
  std::vector<std::size_t> point_of_row;

  std::size_t size() const { return weight.size(); }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

PointSet compress(const FeatureMatrix& x) {
  PointSet p;
  p.dim = x.cols;
  p.point_of_row.resize(x.rows);
  std::map<std::vector<double>, std::size_t> index;
  std::vector<double> key(x.cols);
  std::size_t last = static_cast<std::size_t>(-1);
  for (std::size_t r = 0; r < x.rows; ++r) {
    auto row = x.row(r);
    if (last != static_cast<std::size_t>(-1) && std::equal(row.begin(), row.end(), p.point(last).begin())) {
      p.weight[last] += 1.0;
      p.point_of_row[r] = last;
      continue;
    }
    key.assign(row.begin(), row.end());
    auto [it, inserted] = index.try_emplace(key, p.size());
    if (inserted) {
      p.coords.insert(p.coords.end(), row.begin(), row.end());
      p.weight.push_back(0.0);
    }
    last = it->second;
    p.weight[last] += 1.0;
    p.point_of_row[r] = last;
  }
  return p;
}

// With fewer distinct rows than clusters, peel single rows off repeated
// points so every cluster can be populated.
void split_for(PointSet& p, int k) {
  while (static_cast<int>(p.size()) < k) {
    auto heaviest = std::max_element(p.weight.begin(), p.weight.end());
    if (*heaviest < 2.0) return;
    const std::size_t src = static_cast<std::size_t>(heaviest - p.weight.begin());
    const std::size_t dst = p.size();
    std::vector<double> c(p.point(src).begin(), p.point(src).end());
    p.coords.insert(p.coords.end(), c.begin(), c.end());
    p.weight[src] -= 1.0;
    p.weight.push_back(1.0);
    for (auto& pr : p.point_of_row) {
      if (pr == src) {
        pr = dst;
        break;
      }
    }
  }
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct Lloyd {
  std::vector<std::vector<double>> centroids;
  std::vector<int> labels;  // per point
  double inertia = 0.0;
  std::vector<double> trace;
};

class KMeansRun {
 public:
  KMeansRun(const PointSet& p, int k) : p_(p), k_(k) {}

  Lloyd run(std::uint64_t seed) {
    Lloyd out;
    out.centroids = seed_plus_plus(seed);
    out.labels.assign(p_.size(), -1);
    assign(out);
    constexpr int kMaxIterations = 300;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      update(out);
      out.trace.push_back(inertia(out));
      if (!assign(out)) break;
    }
    update(out);
    out.inertia = inertia(out);
    return out;
  }

 private:
  std::vector<std::vector<double>> seed_plus_plus(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centers;
    std::vector<double> d2(p_.size(), 0.0);
    auto pick = [&](const std::vector<double>& mass) {
      double total = 0.0;
      for (double m : mass) total += m;
      double u = unit_interval(rng()) * total;
      std::size_t last = 0;
      for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] <= 0.0) continue;
        last = i;
        if (u < mass[i]) return i;
        u -= mass[i];
      }
      return last;
    };
    std::size_t first = pick(p_.weight);
    centers.emplace_back(p_.point(first).begin(), p_.point(first).end());
    for (std::size_t i = 0; i < p_.size(); ++i) d2[i] = sq_dist(p_.point(i), centers.back());
    while (static_cast<int>(centers.size()) < k_) {
      std::vector<double> mass(p_.size());
      double total = 0.0;
      for (std::size_t i = 0; i < p_.size(); ++i) {
        mass[i] = p_.weight[i] * d2[i];
        total += mass[i];
      }
      const std::size_t next = total > 0.0 ? pick(mass) : pick(p_.weight);
      centers.emplace_back(p_.point(next).begin(), p_.point(next).end());
      for (std::size_t i = 0; i < p_.size(); ++i) d2[i] = std::min(d2[i], sq_dist(p_.point(i), centers.back()));
    }
    return centers;
  }

  // Nearest centroid; on a tie a point keeps its current cluster if that is
  // among the nearest, otherwise takes the lowest index. Returns whether any
  // label changed.
  bool assign(Lloyd& s) const {
    bool changed = false;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k_; ++c) {
        const double d = sq_dist(p_.point(i), s.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      const int cur = s.labels[i];
      if (cur >= 0 && cur != best && sq_dist(p_.point(i), s.centroids[cur]) == best_d) best = cur;
      if (best != cur) {
        s.labels[i] = best;
        changed = true;
      }
    }
    return changed;
  }

  void recompute(Lloyd& s, std::vector<double>& mass, std::vector<std::size_t>& members) const {
    std::fill(mass.begin(), mass.end(), 0.0);
    std::fill(members.begin(), members.end(), 0);
    std::vector<std::vector<double>> sum(k_, std::vector<double>(p_.dim, 0.0));
    for (std::size_t i = 0; i < p_.size(); ++i) {
      const int c = s.labels[i];
      mass[c] += p_.weight[i];
      ++members[c];
      auto pt = p_.point(i);
      for (std::size_t d = 0; d < p_.dim; ++d) sum[c][d] += p_.weight[i] * pt[d];
    }
    for (int c = 0; c < k_; ++c) {
      if (mass[c] <= 0.0) continue;
      for (std::size_t d = 0; d < p_.dim; ++d) s.centroids[c][d] = sum[c][d] / mass[c];
    }
  }

  void update(Lloyd& s) const {
    std::vector<double> mass(k_);
    std::vector<std::size_t> members(k_);
    recompute(s, mass, members);
    for (int c = 0; c < k_; ++c) {
      if (members[c] != 0) continue;
      // Reseed the empty cluster at the point farthest from its centroid,
      // taken from a cluster that can spare it.
      std::size_t far = p_.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < p_.size(); ++i) {
        if (members[s.labels[i]] < 2) continue;
        const double d = sq_dist(p_.point(i), s.centroids[s.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == p_.size()) continue;
      s.labels[far] = c;
      recompute(s, mass, members);
    }
  }

  double inertia(const Lloyd& s) const {
    double total = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) total += p_.weight[i] * sq_dist(p_.point(i), s.centroids[s.labels[i]]);
    return total;
  }

  const PointSet& p_;
  int k_;
};

Lloyd best_of(const PointSet& p, int k, std::uint64_t seed, int restarts) {
  Lloyd best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    Lloyd run = KMeansRun(p, k).run(derive_seed(seed, static_cast<std::uint64_t>(r)));
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

// Exact silhouette over weighted points: a point of weight w stands for w
// identical rows, so its own cluster's mean distance divides by (W_C - 1).
double weighted_silhouette(const PointSet& p, std::span<const int> labels, int k) {
  std::vector<double> cluster_weight(k, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) cluster_weight[labels[i]] += p.weight[i];
  int populated = 0;
  for (double w : cluster_weight) populated += w > 0.0 ? 1 : 0;
  if (populated < 2) throw Error(ErrorCode::kSingleCluster, "silhouette needs at least two populated clusters");

  double total = 0.0;
  double weight = 0.0;
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    auto pi = p.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j == i) continue;
      dist_sum[labels[j]] += p.weight[j] * std::sqrt(sq_dist(pi, p.point(j)));
    }
    const int own = labels[i];
    weight += p.weight[i];
    if (cluster_weight[own] <= 1.0) continue;  // singleton row scores 0
    const double a = dist_sum[own] / (cluster_weight[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || cluster_weight[c] <= 0.0) continue;
      b = std::min(b, dist_sum[c] / cluster_weight[c]);
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += p.weight[i] * (b - a) / m;
  }
  return total / weight;
}

ClusterModel to_model(const PointSet& p, const Lloyd& l, int k) {
  ClusterModel m;
  m.k = k;
  m.centroids = l.centroids;
  m.inertia = l.inertia;
  m.inertia_trace = l.trace;
  m.assignments.reserve(p.point_of_row.size());
  for (auto pt : p.point_of_row) m.assignments.push_back(l.labels[pt]);
  return m;
}

KSelection select_k_points(const PointSet& base, std::size_t rows, std::uint64_t seed, int restarts) {
  if (rows < static_cast<std::size_t>(kMaxClusters)) {
    throw Error(ErrorCode::kTooFewRows, "k selection needs at least 7 rows");
  }
  KSelection best;
  bool have = false;
  for (int k = kMinClusters; k <= kMaxClusters; ++k) {
    PointSet p = base;
    split_for(p, k);
    Lloyd l = best_of(p, k, derive_seed(seed, 1000 + static_cast<std::uint64_t>(k)), restarts);
    const double s = weighted_silhouette(p, l.labels, k);
    best.per_k.push_back(s);
    if (!have || s > best.silhouette) {
      best.model = to_model(p, l, k);
      best.silhouette = s;
      have = true;
    }
  }
  return best;
}

}  // namespace

ClusterModel kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, int restarts) {
  if (k < 1) throw Error(ErrorCode::kTooFewRows, "k must be positive");
  if (x.rows < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kTooFewRows, std::to_string(x.rows) + " rows cannot form " + std::to_string(k) + " clusters");
  }
  PointSet p = compress(x);
  split_for(p, k);
  return to_model(p, best_of(p, k, seed, std::max(1, restarts)), k);
}

double silhouette(const FeatureMatrix& x, std::span<const int> assignments) {
  if (assignments.size() != x.rows) throw Error(ErrorCode::kLengthMismatch, "one assignment per row required");
  // Distinct (cluster, row) pairs with multiplicities.
  PointSet p;
  p.dim = x.cols;
  std::vector<int> labels;
  std::map<std::pair<int, std::vector<double>>, std::size_t> index;
  int k = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    auto row = x.row(r);
    auto [it, inserted] = index.try_emplace({assignments[r], std::vector<double>(row.begin(), row.end())}, p.size());
    if (inserted) {
      p.coords.insert(p.coords.end(), row.begin(), row.end());
      p.weight.push_back(0.0);
      labels.push_back(assignments[r]);
    }
    p.weight[it->second] += 1.0;
    if (assignments[r] < 0) throw Error(ErrorCode::kLengthMismatch, "negative cluster index");
    k = std::max(k, assignments[r] + 1);
  }
  return weighted_silhouette(p, labels, k);
}

KSelection select_k(const FeatureMatrix& x, std::uint64_t seed, int restarts) {
  return select_k_points(compress(x), x.rows, seed, std::max(1, restarts));
}

FeatureSelection greedy_feature_selection(const FeatureMatrix& x, std::uint64_t seed, int restarts) {
  FeatureSelection out;
  out.silhouette = -std::numeric_limits<double>::infinity();
  std::vector<bool> used(x.cols, false);
  for (;;) {
    std::size_t best_f = x.cols;
    double best_s = -std::numeric_limits<double>::infinity();
    KSelection best_sel;
    for (std::size_t f = 0; f < x.cols; ++f) {
      if (used[f]) continue;
      std::vector<std::size_t> cols = out.features;
      cols.push_back(f);
      KSelection sel = select_k(x.select(cols), seed, restarts);
      if (sel.silhouette > best_s) {
        best_s = sel.silhouette;
        best_f = f;
        best_sel = std::move(sel);
      }
    }
    if (best_f == x.cols || !(best_s > out.silhouette)) break;
    used[best_f] = true;
    out.features.push_back(best_f);
    out.silhouette = best_s;
    out.clustering = std::move(best_sel);
  }
  return out;
}

ClusterMapping map_clusters_accuracy(const ClusterModel& model, const TickSeries& truth) {
  if (model.assignments.size() != truth.context.size()) {
    throw Error(ErrorCode::kLengthMismatch, "cluster assignments and truth differ in length");
  }
  const std::size_t contexts = truth.alphabet.size();
  std::vector<std::vector<std::int64_t>> votes(model.k, std::vector<std::int64_t>(contexts, 0));
  for (std::size_t t = 0; t < truth.context.size(); ++t) ++votes[model.assignments[t]][truth.context[t]];
  ClusterMapping m;
  m.cluster_label.resize(model.k, 0);
  for (int c = 0; c < model.k; ++c) {
    auto it = std::max_element(votes[c].begin(), votes[c].end());  // first maximum wins ties
    m.cluster_label[c] = static_cast<int>(it - votes[c].begin());
  }
  std::int64_t hits = 0;
  m.predicted.reserve(truth.context.size());
  for (std::size_t t = 0; t < truth.context.size(); ++t) {
    const int label = m.cluster_label[model.assignments[t]];
    m.predicted.push_back(label);
    hits += label == truth.context[t] ? 1 : 0;
  }
  m.accuracy = truth.context.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.context.size());
  return m;
}

double baseline_accuracy(const TickSeries& truth) {
  if (truth.context.empty()) throw Error(ErrorCode::kLengthMismatch, "empty truth series");
  std::vector<std::int64_t> counts(truth.alphabet.size(), 0);
  for (int c : truth.context) ++counts[c];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(truth.context.size());
}

AttackReport attack_pipeline(const ActionTimeline& observed, const TickSeries& truth, std::uint64_t seed,
                             const AttackOptions& opts) {
  if (observed.horizon() != truth.horizon()) {
    throw Error(ErrorCode::kLengthMismatch, "observations cover " + std::to_string(observed.horizon()) +
                                                " ticks, truth " + std::to_string(truth.horizon()));
  }
  const FeatureMatrix x = build_feature_matrix(observed, opts.features);
  AttackReport report;
  KSelection clustering;
  if (opts.feature_selection && x.cols >= 2) {
    FeatureSelection fs = greedy_feature_selection(x, seed, opts.restarts);
    for (auto f : fs.features) report.dominant_features.push_back(x.names[f]);
    clustering = std::move(fs.clustering);
  } else {
    clustering = select_k(x, seed, opts.restarts);
    report.dominant_features = x.names;
  }
  const ClusterMapping mapping = map_clusters_accuracy(clustering.model, truth);
  report.alphabet = truth.alphabet;
  report.predicted = mapping.predicted;
  report.accuracy = mapping.accuracy;
  report.baseline = baseline_accuracy(truth);
  report.chosen_k = clustering.model.k;
  report.silhouette = clustering.silhouette;
  return report;
}

}  // namespace adaptleak
