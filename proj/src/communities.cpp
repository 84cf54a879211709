// SPDX-License-Identifier: Apache-2.0
#include "datlas/communities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "datlas/error.hpp"
#include "datlas/simd/kernels.hpp"

namespace datlas {

std::size_t default_community_count(std::size_t n) { return n < 10000 ? 4 : 100; }

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Run {
  std::vector<std::uint32_t> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

RowMatrix seed_centers(const RowMatrix& x, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto dim = static_cast<std::size_t>(x.cols());
  const auto& kt = simd::kernels();
  RowMatrix c(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  c.row(0) = x.row(static_cast<Eigen::Index>(pick(rng)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = kt.sqdist(x.row(i).data(), c.row(0).data(), dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 1; j < k; ++j) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    require(total > 0.0, ErrorKind::InvalidArgument,
            "degenerate embedding: fewer than k=" + std::to_string(k) + " distinct rows");
    const double target = unit(rng) * total;
    double acc = 0.0;
    std::size_t chosen = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      chosen = i;
      if (acc >= target) break;
    }
    c.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(chosen));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], kt.sqdist(x.row(i).data(), c.row(j).data(), dim));
    }
  }
  return c;
}

Run lloyd(const RowMatrix& x, const Eigen::VectorXd& row_norms, RowMatrix c, std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(c.rows());
  const auto dim = static_cast<std::size_t>(x.cols());
  const auto& kt = simd::kernels();
  Run run;
  run.labels.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::size_t> counts(k);
  Eigen::MatrixXd gram;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    gram.noalias() = x * c.transpose();
    const Eigen::VectorXd cn = c.rowwise().squaredNorm();
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = row_norms[static_cast<Eigen::Index>(i)] + cn[static_cast<Eigen::Index>(j)] -
                         2.0 * gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(j);
        }
      }
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }

    // Empty clusters take the farthest member of the currently largest one.
    std::fill(counts.begin(), counts.end(), 0);
    for (auto l : run.labels) ++counts[l];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      const auto big = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (run.labels[i] != big) continue;
        const double d = kt.sqdist(x.row(i).data(), c.row(big).data(), dim);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      run.labels[far] = static_cast<std::uint32_t>(j);
      --counts[big];
      counts[j] = 1;
      changed = true;
    }

    c.setZero();
    for (std::size_t i = 0; i < n; ++i) c.row(run.labels[i]) += x.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < k; ++j) c.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
    if (!changed) break;
  }

  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) run.inertia += kt.sqdist(x.row(i).data(), c.row(run.labels[i]).data(), dim);
  return run;
}

std::vector<std::uint32_t> canonical_labels(const std::vector<std::uint32_t>& labels, std::size_t k) {
  std::vector<std::uint32_t> remap(k, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  std::vector<std::uint32_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& r = remap[labels[i]];
    if (r == std::numeric_limits<std::uint32_t>::max()) r = next++;
    out[i] = r;
  }
  return out;
}

}  // namespace

CommunityPartition kmeans_diffusion(const DiffusionEmbedding& emb, const KMeansOptions& options) {
  const std::size_t n = emb.num_nodes();
  const std::size_t k = options.k;
  require(k >= 2, ErrorKind::InvalidArgument, "k-means needs k >= 2 (got " + std::to_string(k) + ")");
  require(k <= n, ErrorKind::InvalidArgument,
          "k=" + std::to_string(k) + " exceeds node count n=" + std::to_string(n));
  require(options.restarts >= 1, ErrorKind::InvalidArgument, "k-means needs at least one run");

  const RowMatrix x = emb.coords;
  const Eigen::VectorXd row_norms = x.rowwise().squaredNorm();
  std::mt19937_64 rng(options.seed);
  Run best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Run run = lloyd(x, row_norms, seed_centers(x, k, rng), options.max_iterations);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  CommunityPartition part;
  part.k = k;
  part.labels = canonical_labels(best.labels, k);
  part.t_ref = emb.t;
  part.seed = options.seed;
  part.restarts = options.restarts;
  part.inertia = best.inertia;
  part.sizes.assign(k, 0);
  for (auto l : part.labels) ++part.sizes[l];
  part.fingerprint = emb.fingerprint;
  return part;
}

CommunityPartition partition_from_labels(const SparseGraph& g, std::vector<std::uint32_t> labels) {
  require(labels.size() == g.num_nodes(), ErrorKind::InvalidArgument, "one label per node required");
  CommunityPartition part;
  part.k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  part.sizes.assign(part.k, 0);
  for (auto l : labels) ++part.sizes[l];
  for (std::size_t c = 0; c < part.k; ++c) {
    require(part.sizes[c] > 0, ErrorKind::InvalidArgument, "community " + std::to_string(c) + " is empty");
  }
  part.labels = std::move(labels);
  part.fingerprint = g.fingerprint();
  return part;
}

double cheeger_mixing(const SparseGraph& g, const CommunityPartition& part, std::size_t c) {
  require(part.labels.size() == g.num_nodes(), ErrorKind::InvalidArgument, "partition does not match graph");
  double cut = 0.0, vol = 0.0;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (part.labels[i] != c) continue;
    vol += g.degree(i);
    for (NodeId j : g.neighbors(i)) {
      if (part.labels[j] != c) cut += 1.0;
    }
  }
  const double rest = static_cast<double>(g.total_degree()) - vol;
  const double denom = std::min(vol, rest);
  if (!(denom > 0.0)) fail(ErrorKind::Undefined, "undefined Cheeger mixing for community " + std::to_string(c));
  return cut / denom;
}

std::vector<std::uint64_t> time_grid(std::uint64_t tau_ceil, std::size_t points) {
  require(points >= 1, ErrorKind::InvalidArgument, "time grid needs at least one point");
  const double top = 2.0 * static_cast<double>(std::max<std::uint64_t>(tau_ceil, 1));
  std::vector<std::uint64_t> out;
  out.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = points == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    const auto t = static_cast<std::uint64_t>(std::llround(std::exp(f * std::log(top))));
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

EntryExitSeries entry_exit_probabilities(const SpectralBasis& basis, const CommunityPartition& part,
                                         std::span<const std::uint64_t> times) {
  const std::size_t n = basis.num_nodes();
  const std::size_t kk = basis.rank();
  const std::size_t nc = part.k;
  require(part.labels.size() == n, ErrorKind::InvalidArgument, "partition does not match basis");
  require(nc >= 2, ErrorKind::InvalidArgument, "entry/exit probabilities need at least two communities");

  // Per-mode community sums.
  Eigen::MatrixXd s_psi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(kk));
  Eigen::MatrixXd s_phi = s_psi;
  const auto& psi = basis.psi();
  const auto& phi = basis.phi();
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kk); ++k) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      const auto c = static_cast<Eigen::Index>(part.labels[static_cast<std::size_t>(i)]);
      s_psi(c, k) += psi(i, k);
      s_phi(c, k) += phi(i, k);
    }
  }
  const Eigen::RowVectorXd tot_psi = s_psi.colwise().sum();
  const Eigen::RowVectorXd tot_phi = s_phi.colwise().sum();

  EntryExitSeries out;
  out.times.assign(times.begin(), times.end());
  out.p_in.assign(nc, std::vector<double>(times.size()));
  out.p_out.assign(nc, std::vector<double>(times.size()));
  std::vector<double> lt(kk);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (std::size_t k = 0; k < kk; ++k) lt[k] = int_pow(basis.eigenvalues()[k], times[ti]);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const double size_c = static_cast<double>(part.sizes[c]);
      const double size_rest = static_cast<double>(n) - size_c;
      require(size_c > 0 && size_rest > 0, ErrorKind::Undefined,
              "community " + std::to_string(c) + " is empty or covers every node");
      double in = 0.0, out_sum = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        const double psi_c = s_psi(ci, ki), phi_c = s_phi(ci, ki);
        in += lt[k] * (tot_psi[ki] - psi_c) * phi_c;
        out_sum += lt[k] * psi_c * (tot_phi[ki] - phi_c);
      }
      out.p_in[c][ti] = in / (size_c * size_rest);
      out.p_out[c][ti] = out_sum / (size_c * size_rest);
    }
  }
  return out;
}

CommunityFeatures community_features(const SparseGraph& g, const SpectralBasis& basis,
                                     const CommunityPartition& part,
                                     std::span<const std::uint64_t> times) {
  require(g.fingerprint() == basis.fingerprint(), ErrorKind::InvalidArgument,
          "basis does not belong to this graph");
  auto series = entry_exit_probabilities(basis, part, times);
  const double dtot = static_cast<double>(g.total_degree());
  const auto n = static_cast<double>(g.num_nodes());

  CommunityFeatures f;
  f.k = part.k;
  f.t_ref = part.t_ref;
  f.seed = part.seed;
  f.fingerprint = g.fingerprint();
  f.times = series.times;
  std::vector<double> vol(part.k, 0.0);
  for (NodeId i = 0; i < g.num_nodes(); ++i) vol[part.labels[i]] += g.degree(i);
  for (std::size_t c = 0; c < part.k; ++c) {
    CommunityRecord r;
    r.index = c;
    r.size = part.sizes[c];
    r.volume = vol[c];
    r.mean_degree = vol[c] / static_cast<double>(r.size);
    r.cheeger = cheeger_mixing(g, part, c);
    r.p_in = std::move(series.p_in[c]);
    r.p_out = std::move(series.p_out[c]);
    r.limit_in = vol[c] / (static_cast<double>(r.size) * dtot);
    r.limit_out = (dtot - vol[c]) / ((n - static_cast<double>(r.size)) * dtot);
    f.communities.push_back(std::move(r));
  }
  f.summary = heterogeneity_summary(f);
  return f;
}

HeterogeneitySummary heterogeneity_summary(const CommunityFeatures& features) {
  HeterogeneitySummary s;
  const std::size_t nc = features.communities.size();
  if (nc == 0) return s;
  auto sd_at = [&](std::size_t ti, bool in) {
    double mean = 0.0;
    for (const auto& r : features.communities) mean += in ? r.p_in[ti] : r.p_out[ti];
    mean /= static_cast<double>(nc);
    double var = 0.0;
    for (const auto& r : features.communities) {
      const double d = (in ? r.p_in[ti] : r.p_out[ti]) - mean;
      var += d * d;
    }
    return std::sqrt(var / static_cast<double>(nc));
  };
  s.max_sd_in = -1.0;
  s.max_sd_out = -1.0;
  for (std::size_t ti = 0; ti < features.times.size(); ++ti) {
    const double a = sd_at(ti, true), b = sd_at(ti, false);
    if (a > s.max_sd_in) {
      s.max_sd_in = a;
      s.argmax_t_in = features.times[ti];
    }
    if (b > s.max_sd_out) {
      s.max_sd_out = b;
      s.argmax_t_out = features.times[ti];
    }
  }
  s.max_sd_in = std::max(s.max_sd_in, 0.0);
  s.max_sd_out = std::max(s.max_sd_out, 0.0);
  double h = 0.0;
  for (const auto& r : features.communities) h += r.cheeger;
  s.mean_cheeger = h / static_cast<double>(nc);
  return s;
}

RankKey parse_rank_key(std::string_view key) {
  if (key == "p_in") return RankKey::PIn;
  if (key == "p_out") return RankKey::POut;
  if (key == "cheeger") return RankKey::Cheeger;
  fail(ErrorKind::InvalidArgument, "unknown ranking key '" + std::string(key) + "' (expected p_in, p_out, cheeger)");
}

std::string_view rank_key_name(RankKey key) {
  switch (key) {
    case RankKey::PIn: return "p_in";
    case RankKey::POut: return "p_out";
    case RankKey::Cheeger: return "cheeger";
  }
  return "unknown";
}

std::vector<RankedEntry> rank_communities(const CommunityFeatures& features, RankKey key,
                                          std::uint64_t t, std::size_t m) {
  std::size_t ti = 0;
  if (key != RankKey::Cheeger) {
    const auto it = std::find(features.times.begin(), features.times.end(), t);
    require(it != features.times.end(), ErrorKind::InvalidArgument,
            "t=" + std::to_string(t) + " is not on the feature time grid");
    ti = static_cast<std::size_t>(it - features.times.begin());
  }
  std::vector<RankedEntry> out;
  double mean = 0.0;
  for (const auto& r : features.communities) {
    RankedEntry e;
    e.community = r.index;
    e.value = key == RankKey::PIn ? r.p_in[ti] : key == RankKey::POut ? r.p_out[ti] : r.cheeger;
    mean += e.value;
    out.push_back(e);
  }
  if (!out.empty()) mean /= static_cast<double>(out.size());
  for (auto& e : out) e.percent_of_mean = mean != 0.0 ? 100.0 * e.value / mean : 0.0;
  std::stable_sort(out.begin(), out.end(), [](const RankedEntry& a, const RankedEntry& b) { return a.value < b.value; });
  for (std::size_t i = 0; i < out.size() && i < m; ++i) out[i].highlighted = true;
  return out;
}

nlohmann::json partition_to_json(const CommunityPartition& part) {
  return nlohmann::json{{"k", part.k},           {"t_ref", part.t_ref},   {"seed", part.seed},
                        {"restarts", part.restarts}, {"inertia", part.inertia}, {"sizes", part.sizes},
                        {"labels", part.labels}};
}

nlohmann::json features_to_json(const CommunityFeatures& f) {
  nlohmann::json comms = nlohmann::json::array();
  for (const auto& r : f.communities) {
    comms.push_back({{"index", r.index},
                     {"size", r.size},
                     {"volume", r.volume},
                     {"mean_degree", r.mean_degree},
                     {"cheeger", r.cheeger},
                     {"p_in", r.p_in},
                     {"p_out", r.p_out},
                     {"limit_in", r.limit_in},
                     {"limit_out", r.limit_out}});
  }
  return nlohmann::json{{"k", f.k},
                        {"t_ref", f.t_ref},
                        {"seed", f.seed},
                        {"times", f.times},
                        {"communities", comms},
                        {"summary",
                         {{"max_sd_p_in", f.summary.max_sd_in},
                          {"argmax_t_p_in", f.summary.argmax_t_in},
                          {"max_sd_p_out", f.summary.max_sd_out},
                          {"argmax_t_p_out", f.summary.argmax_t_out},
                          {"mean_cheeger", f.summary.mean_cheeger}}}};
}

nlohmann::json ranking_to_json(const std::vector<RankedEntry>& ranking, RankKey key, std::uint64_t t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : ranking) {
    rows.push_back({{"community", e.community},
                    {"value", e.value},
                    {"percent_of_mean", e.percent_of_mean},
                    {"highlighted", e.highlighted}});
  }
  return nlohmann::json{{"key", rank_key_name(key)}, {"t", t}, {"ranking", rows}};
}

}  // namespace datlas
