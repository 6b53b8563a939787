#include "catfuse/block_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace catfuse {

void BlockProblem::validate() const {
  if (weights.empty() || weights.size() != targets.size())
    throw std::invalid_argument("block: weights/targets shape mismatch");
  if (!(n_total > 0.0) || !std::isfinite(n_total))
    throw std::invalid_argument("block: n_total must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("block: lambda must be finite and nonnegative");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("block: gamma must be positive");
  bool any_positive = false;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < 0.0 || !std::isfinite(weights[k]))
      throw std::invalid_argument("block: weights must be finite and nonnegative");
    if (weights[k] > 0.0) {
      any_positive = true;
      if (!std::isfinite(targets[k]))
        throw std::invalid_argument("block: target not finite at a populated level");
    }
  }
  if (!any_positive) throw std::invalid_argument("block: all weights zero");
}

double mcp_value(double x, double lambda, double gamma) {
  if (x < 0.0) throw std::invalid_argument("mcp: negative argument");
  if (!(gamma > 0.0)) throw std::invalid_argument("mcp: gamma must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("mcp: negative lambda");
  if (lambda == 0.0) return 0.0;
  const double cap = gamma * lambda;
  if (x >= cap) return 0.5 * gamma * lambda * lambda;
  return lambda * x - x * x / (2.0 * gamma);
}

double block_objective(const BlockProblem& prob, const std::vector<double>& coefficients) {
  prob.validate();
  if (coefficients.size() != prob.weights.size())
    throw std::invalid_argument("block: coefficient length mismatch");
  double sse = 0.0;
  std::vector<double> populated;
  populated.reserve(coefficients.size());
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (prob.weights[k] > 0.0) {
      const double dev = prob.targets[k] - coefficients[k];
      sse += prob.weights[k] * dev * dev;
      populated.push_back(coefficients[k]);
    }
  }
  std::sort(populated.begin(), populated.end());
  double pen = 0.0;
  for (std::size_t k = 0; k + 1 < populated.size(); ++k)
    pen += mcp_value(populated[k + 1] - populated[k], prob.lambda, prob.gamma);
  return sse / (2.0 * prob.n_total) + pen;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Levels sharing one exactly-equal target, pooled; equal targets always fuse.
struct Unit {
  double weight = 0.0;
  double target = 0.0;
  std::vector<int> levels;
};

struct Prep {
  std::vector<Unit> units;  // sorted by target ascending
  int raw_positive = 0;     // positive-weight level count before pooling
};

Prep pool_sorted_units(const BlockProblem& prob) {
  Prep out;
  std::vector<int> idx;
  for (int k = 0; k < prob.num_levels(); ++k)
    if (prob.weights[k] > 0.0) idx.push_back(k);
  out.raw_positive = static_cast<int>(idx.size());
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (prob.targets[a] != prob.targets[b]) return prob.targets[a] < prob.targets[b];
    return a < b;
  });
  for (int k : idx) {
    if (!out.units.empty() && out.units.back().target == prob.targets[k]) {
      out.units.back().weight += prob.weights[k];
      out.units.back().levels.push_back(k);
    } else {
      Unit u;
      u.weight = prob.weights[k];
      u.target = prob.targets[k];
      u.levels.push_back(k);
      out.units.push_back(std::move(u));
    }
  }
  return out;
}

// Contiguous clusters over units: cluster c covers units [starts[c], starts[c+1]).
struct Clusters {
  std::vector<int> starts;  // ascending, starts[0] == 0
  int count = 0;

  static Clusters from_boundary_mask(unsigned mask, int m) {
    Clusters c;
    c.starts.push_back(0);
    for (int b = 0; b < m - 1; ++b)
      if (mask & (1u << b)) c.starts.push_back(b + 1);
    c.count = static_cast<int>(c.starts.size());
    return c;
  }

  int begin_unit(int c) const { return starts[c]; }
  int end_unit(int c, int m) const { return c + 1 < count ? starts[c + 1] : m; }
};

void cluster_stats(const Clusters& cl, const std::vector<Unit>& units, std::vector<double>& W,
                   std::vector<double>& T) {
  const int m = static_cast<int>(units.size());
  W.assign(cl.count, 0.0);
  T.assign(cl.count, 0.0);
  for (int c = 0; c < cl.count; ++c) {
    double sw = 0.0, swt = 0.0;
    for (int u = cl.begin_unit(c); u < cl.end_unit(c, m); ++u) {
      sw += units[u].weight;
      swt += units[u].weight * units[u].target;
    }
    W[c] = sw;
    T[c] = swt / sw;
  }
}

// True objective over units for cluster values v (assumed non-decreasing);
// penalty on adjacent cluster gaps only.
double unit_objective(const std::vector<Unit>& units, const Clusters& cl,
                      const std::vector<double>& v, double n, double lambda, double gamma) {
  const int m = static_cast<int>(units.size());
  double sse = 0.0;
  for (int c = 0; c < cl.count; ++c)
    for (int u = cl.begin_unit(c); u < cl.end_unit(c, m); ++u) {
      const double dev = units[u].target - v[c];
      sse += units[u].weight * dev * dev;
    }
  double pen = 0.0;
  for (int c = 0; c + 1 < cl.count; ++c)
    pen += mcp_value(std::max(0.0, v[c + 1] - v[c]), lambda, gamma);
  return sse / (2.0 * n) + pen;
}

// Exact minimizer of
//   a2 (v - T)^2 + [has_left] mcp(v - vl) + [has_right] mcp(vr - v)
// over v in [vl, vr] (absent sides unbounded). Piecewise quadratic: the MCP
// saturation points split the axis; each piece contributes endpoint and
// vertex candidates.
double minimize_cluster_value(double a2, double T, bool has_left, double vl, bool has_right,
                              double vr, double lambda, double gamma) {
  const double cap = gamma * lambda;
  double lo = has_left ? vl : std::min(T, (has_right ? vr - cap : T));
  double hi = has_right ? vr : std::max(T, (has_left ? vl + cap : T));
  if (lo > hi) std::swap(lo, hi);

  std::vector<double> cuts{lo, hi};
  if (has_left && vl + cap > lo && vl + cap < hi) cuts.push_back(vl + cap);
  if (has_right && vr - cap > lo && vr - cap < hi) cuts.push_back(vr - cap);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto value_at = [&](double v) {
    double h = a2 * (v - T) * (v - T);
    if (has_left) h += mcp_value(std::max(0.0, v - vl), lambda, gamma);
    if (has_right) h += mcp_value(std::max(0.0, vr - v), lambda, gamma);
    return h;
  };

  double best_v = cuts.front();
  double best_h = value_at(best_v);
  auto consider = [&](double v) {
    const double h = value_at(v);
    if (h < best_h - 0.0 || (h == best_h && v < best_v)) {
      best_h = h;
      best_v = v;
    }
  };
  for (std::size_t i = 1; i < cuts.size(); ++i) consider(cuts[i]);

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    const bool left_unsat = has_left && (mid - vl) < cap;
    const bool right_unsat = has_right && (vr - mid) < cap;
    double q2 = a2;
    double q1 = -2.0 * a2 * T;
    if (left_unsat) {
      q2 -= 0.5 / gamma;
      q1 += lambda + vl / gamma;
    }
    if (right_unsat) {
      q2 -= 0.5 / gamma;
      q1 += -lambda + vr / gamma;
    }
    if (q2 > 0.0) {
      const double vertex = -q1 / (2.0 * q2);
      if (vertex > a && vertex < b) consider(vertex);
    }
  }
  return best_v;
}

// Cyclic exact coordinate descent on cluster values, order-preserving.
void cd_cluster_values(const std::vector<double>& W, const std::vector<double>& T, double n,
                       double lambda, double gamma, std::vector<double>& v) {
  const int C = static_cast<int>(v.size());
  if (C <= 1) {
    if (C == 1) v[0] = T[0];
    return;
  }
  for (int iter = 0; iter < 400; ++iter) {
    double change = 0.0, scale = 1.0;
    for (int c = 0; c < C; ++c) {
      const double nv =
          minimize_cluster_value(W[c] / (2.0 * n), T[c], c > 0, c > 0 ? v[c - 1] : 0.0,
                                 c + 1 < C, c + 1 < C ? v[c + 1] : 0.0, lambda, gamma);
      change = std::max(change, std::abs(nv - v[c]));
      v[c] = nv;
      scale = std::max(scale, std::abs(nv));
    }
    if (change < 1e-14 * scale) break;
  }
}

BlockSolution finalize_solution(const BlockProblem& prob, const std::vector<Unit>& units,
                                const Clusters& cl, const std::vector<double>& v) {
  const int m = static_cast<int>(units.size());
  BlockSolution out;
  out.coefficients.assign(prob.num_levels(), 0.0);
  std::vector<double> level_value(prob.num_levels(), 0.0);
  for (int c = 0; c < cl.count; ++c)
    for (int u = cl.begin_unit(c); u < cl.end_unit(c, m); ++u)
      for (int k : units[u].levels) out.coefficients[k] = v[c];

  // Fused groups by exact value among populated levels, ordered by value.
  out.cluster_assignment.assign(prob.num_levels(), -1);
  std::vector<double> distinct;
  for (int c = 0; c < cl.count; ++c) distinct.push_back(v[c]);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (int k = 0; k < prob.num_levels(); ++k) {
    if (prob.weights[k] > 0.0) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), out.coefficients[k]);
      out.cluster_assignment[k] = static_cast<int>(it - distinct.begin());
    }
  }
  out.objective = block_objective(prob, out.coefficients);
  return out;
}

BlockSolution lambda_zero_solution(const BlockProblem& prob) {
  BlockSolution out;
  out.coefficients.assign(prob.num_levels(), 0.0);
  for (int k = 0; k < prob.num_levels(); ++k)
    if (prob.weights[k] > 0.0) out.coefficients[k] = prob.targets[k];
  out.cluster_assignment.assign(prob.num_levels(), -1);
  std::vector<double> distinct;
  for (int k = 0; k < prob.num_levels(); ++k)
    if (prob.weights[k] > 0.0) distinct.push_back(out.coefficients[k]);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (int k = 0; k < prob.num_levels(); ++k)
    if (prob.weights[k] > 0.0)
      out.cluster_assignment[k] = static_cast<int>(
          std::lower_bound(distinct.begin(), distinct.end(), out.coefficients[k]) -
          distinct.begin());
  out.objective = block_objective(prob, out.coefficients);
  return out;
}

// ---------------------------------------------------------------------------
// Exact path: enumerate tie/unsaturated/saturated phases of every adjacent
// unit pair, solve each phase's stationarity system, and keep the feasible
// candidate with the lowest true objective. 3^(m-1) small linear solves.
// ---------------------------------------------------------------------------

// Dense Gaussian elimination with partial pivoting; false when singular.
bool solve_dense(std::vector<double>& A, std::vector<double>& b, int nrow) {
  double amax = 0.0;
  for (const double a : A) amax = std::max(amax, std::abs(a));
  const double pivot_floor = 1e-13 * std::max(1.0, amax);
  for (int col = 0; col < nrow; ++col) {
    int piv = col;
    for (int r = col + 1; r < nrow; ++r)
      if (std::abs(A[r * nrow + col]) > std::abs(A[piv * nrow + col])) piv = r;
    if (std::abs(A[piv * nrow + col]) < pivot_floor) return false;
    if (piv != col) {
      for (int c = 0; c < nrow; ++c) std::swap(A[col * nrow + c], A[piv * nrow + c]);
      std::swap(b[col], b[piv]);
    }
    const double d = A[col * nrow + col];
    for (int r = col + 1; r < nrow; ++r) {
      const double f = A[r * nrow + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < nrow; ++c) A[r * nrow + c] -= f * A[col * nrow + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = nrow - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < nrow; ++c) s -= A[r * nrow + c] * b[c];
    b[r] = s / A[r * nrow + r];
  }
  return true;
}

BlockSolution solve_exact_path(const BlockProblem& prob, const Prep& prep) {
  const auto& units = prep.units;
  const int m = static_cast<int>(units.size());
  const double n = prob.n_total, lambda = prob.lambda, gamma = prob.gamma;
  const double cap = gamma * lambda;

  double target_scale = 1.0;
  for (const auto& u : units) target_scale = std::max(target_scale, std::abs(u.target));
  const double feas_eps = 1e-9 * (target_scale + cap + 1.0);

  long patterns = 1;
  for (int b = 0; b < m - 1; ++b) patterns *= 3;

  double best_obj = kInf;
  Clusters best_cl;
  std::vector<double> best_v;

  std::vector<int> digit(std::max(0, m - 1), 0);
  std::vector<double> W, T, A, rhs;
  for (long pat = 0; pat < patterns; ++pat) {
    long rem = pat;
    for (int b = 0; b < m - 1; ++b) {
      digit[b] = static_cast<int>(rem % 3);  // 0 tie, 1 unsaturated, 2 saturated
      rem /= 3;
    }

    Clusters cl;
    cl.starts.push_back(0);
    for (int b = 0; b < m - 1; ++b)
      if (digit[b] != 0) cl.starts.push_back(b + 1);
    cl.count = static_cast<int>(cl.starts.size());
    cluster_stats(cl, units, W, T);
    const int C = cl.count;

    A.assign(static_cast<std::size_t>(C) * C, 0.0);
    rhs.assign(C, 0.0);
    for (int c = 0; c < C; ++c) {
      A[c * C + c] = W[c] / n;
      rhs[c] = W[c] / n * T[c];
    }
    for (int c = 0; c + 1 < C; ++c) {
      const int boundary_unit = cl.starts[c + 1] - 1;  // pair (boundary_unit, +1)
      if (digit[boundary_unit] == 1) {                 // unsaturated gap
        A[c * C + c] -= 1.0 / gamma;
        A[(c + 1) * C + (c + 1)] -= 1.0 / gamma;
        A[c * C + (c + 1)] += 1.0 / gamma;
        A[(c + 1) * C + c] += 1.0 / gamma;
        rhs[c] += lambda;
        rhs[c + 1] -= lambda;
      }
    }
    if (!solve_dense(A, rhs, C)) continue;
    const std::vector<double>& v = rhs;

    bool feasible = true;
    for (int c = 0; c + 1 < C && feasible; ++c) {
      const double g = v[c + 1] - v[c];
      const int boundary_unit = cl.starts[c + 1] - 1;
      if (digit[boundary_unit] == 1)
        feasible = g >= -feas_eps && g <= cap + feas_eps;
      else
        feasible = g >= cap - feas_eps;
    }
    if (!feasible) continue;

    std::vector<double> vmono(v);
    for (int c = 1; c < C; ++c) vmono[c] = std::max(vmono[c], vmono[c - 1]);
    const double obj = unit_objective(units, cl, vmono, n, lambda, gamma);
    if (obj < best_obj) {
      best_obj = obj;
      best_cl = cl;
      best_v = vmono;
    }
  }
  return finalize_solution(prob, units, best_cl, best_v);
}

// ---------------------------------------------------------------------------
// Large-block path: segmentation DP under the saturated-gap cost model, then
// local merge/split search with exact coordinate descent on cluster values.
// ---------------------------------------------------------------------------

struct PrefixSums {
  std::vector<double> w, wt, wtt;

  explicit PrefixSums(const std::vector<Unit>& units) {
    const std::size_t m = units.size();
    w.assign(m + 1, 0.0);
    wt.assign(m + 1, 0.0);
    wtt.assign(m + 1, 0.0);
    for (std::size_t u = 0; u < m; ++u) {
      w[u + 1] = w[u] + units[u].weight;
      wt[u + 1] = wt[u] + units[u].weight * units[u].target;
      wtt[u + 1] = wtt[u] + units[u].weight * units[u].target * units[u].target;
    }
  }

  // Weighted SSE at the weighted mean over units [a, b], in 1/(2n) units.
  double segcost(int a, int b, double n) const {
    const double sw = w[b + 1] - w[a];
    const double swt = wt[b + 1] - wt[a];
    const double swtt = wtt[b + 1] - wtt[a];
    return std::max(0.0, swtt - swt * swt / sw) / (2.0 * n);
  }

  double segweight(int a, int b) const { return w[b + 1] - w[a]; }
  double segmean(int a, int b) const { return (wt[b + 1] - wt[a]) / (w[b + 1] - w[a]); }
};

struct RefinedPartition {
  Clusters cl;
  std::vector<double> v;
  double obj = kInf;
};

RefinedPartition refine_partition(const BlockProblem& prob, const std::vector<Unit>& units,
                                  Clusters cl) {
  RefinedPartition out;
  std::vector<double> W, T;
  cluster_stats(cl, units, W, T);
  std::vector<double> v = T;  // means are monotone for contiguous sorted clusters
  cd_cluster_values(W, T, prob.n_total, prob.lambda, prob.gamma, v);
  out.obj = unit_objective(units, cl, v, prob.n_total, prob.lambda, prob.gamma);
  out.cl = std::move(cl);
  out.v = std::move(v);
  return out;
}

// Best achievable improvement from splitting one cluster into two at mean gap
// gbar with optimal symmetric shrinkage, ignoring couplings to neighbors:
//   G - min_g [ mu (gbar - g)^2 + rho(g) ],  g in (0, gbar].
double split_gain(double G, double mu, double gbar, double lambda, double gamma) {
  const double cap = gamma * lambda;
  double best = mcp_value(gbar, lambda, gamma);  // g = gbar, no shrinkage
  if (cap < gbar) {
    const double at_cap = mu * (gbar - cap) * (gbar - cap) + 0.5 * gamma * lambda * lambda;
    best = std::min(best, at_cap);
  }
  const double denom = 2.0 * mu - 1.0 / gamma;
  if (std::abs(denom) > 1e-15) {
    const double g = (2.0 * mu * gbar - lambda) / denom;
    if (g > 0.0 && g < std::min(gbar, cap))
      best = std::min(best, mu * (gbar - g) * (gbar - g) + mcp_value(g, lambda, gamma));
  }
  return G - best;
}

BlockSolution solve_dp_path(const BlockProblem& prob, const Prep& prep) {
  const auto& units = prep.units;
  const int m = static_cast<int>(units.size());
  const double n = prob.n_total, lambda = prob.lambda, gamma = prob.gamma;
  const double cap = gamma * lambda;
  const double bcost = 0.5 * gamma * lambda * lambda;
  PrefixSums ps(units);

  // DP over contiguous segmentations with the saturated boundary charge.
  std::vector<double> dp(m, kInf);
  std::vector<int> from(m, 0);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a <= i; ++a) {
      const double base = a == 0 ? 0.0 : dp[a - 1] + bcost;
      const double c = base + ps.segcost(a, i, n);
      if (c < dp[i]) {
        dp[i] = c;
        from[i] = a;
      }
    }
  }
  Clusters cl;
  {
    std::vector<int> starts_rev;
    int i = m - 1;
    while (i >= 0) {
      starts_rev.push_back(from[i]);
      i = from[i] - 1;
    }
    cl.starts.assign(starts_rev.rbegin(), starts_rev.rend());
    cl.count = static_cast<int>(cl.starts.size());
  }

  RefinedPartition cur = refine_partition(prob, units, cl);

  // Local search: exact pairwise screens pick candidate merges (unsaturated
  // neighbors) and splits (positive isolated-pair gain); each surviving move
  // is re-solved exactly and accepted only on strict improvement.
  const int max_rounds = 2 * m + 10;
  for (int round = 0; round < max_rounds; ++round) {
    RefinedPartition best_move;
    best_move.obj = cur.obj - 1e-12 * (1.0 + std::abs(cur.obj));

    for (int c = 0; c + 1 < cur.cl.count; ++c) {
      const double gap = cur.v[c + 1] - cur.v[c];
      if (gap < cap * (1.0 + 1e-12)) {
        Clusters merged;
        merged.starts = cur.cl.starts;
        merged.starts.erase(merged.starts.begin() + c + 1);
        merged.count = cur.cl.count - 1;
        RefinedPartition cand = refine_partition(prob, units, std::move(merged));
        if (cand.obj < best_move.obj) best_move = std::move(cand);
      }
    }

    for (int c = 0; c < cur.cl.count; ++c) {
      const int a = cur.cl.begin_unit(c);
      const int b = cur.cl.end_unit(c, m) - 1;
      if (a == b) continue;
      const double whole = ps.segcost(a, b, n);
      for (int s = a; s < b; ++s) {
        const double G = whole - ps.segcost(a, s, n) - ps.segcost(s + 1, b, n);
        const double wl = ps.segweight(a, s), wr = ps.segweight(s + 1, b);
        const double mu = wl * wr / (wl + wr) / (2.0 * n);
        const double gbar = ps.segmean(s + 1, b) - ps.segmean(a, s);
        if (split_gain(G, mu, gbar, lambda, gamma) <= 1e-14) continue;
        Clusters split;
        split.starts = cur.cl.starts;
        split.starts.insert(
            std::upper_bound(split.starts.begin(), split.starts.end(), s), s + 1);
        split.count = cur.cl.count + 1;
        RefinedPartition cand = refine_partition(prob, units, std::move(split));
        if (cand.obj < best_move.obj) best_move = std::move(cand);
      }
    }

    if (best_move.v.empty()) break;
    cur = std::move(best_move);
  }

  return finalize_solution(prob, units, cur.cl, cur.v);
}

}  // namespace

namespace detail {

BlockSolution solve_fused_block_exact(const BlockProblem& prob) {
  prob.validate();
  if (prob.lambda == 0.0) return lambda_zero_solution(prob);
  return solve_exact_path(prob, pool_sorted_units(prob));
}

BlockSolution solve_fused_block_dp(const BlockProblem& prob) {
  prob.validate();
  if (prob.lambda == 0.0) return lambda_zero_solution(prob);
  return solve_dp_path(prob, pool_sorted_units(prob));
}

}  // namespace detail

BlockSolution solve_fused_block(const BlockProblem& prob) {
  prob.validate();
  if (prob.lambda == 0.0) return lambda_zero_solution(prob);
  Prep prep = pool_sorted_units(prob);
  if (static_cast<int>(prep.units.size()) <= detail::kExactPathMaxLevels)
    return solve_exact_path(prob, prep);
  return solve_dp_path(prob, prep);
}

BlockSolution brute_force_block_oracle(const BlockProblem& prob) {
  prob.validate();
  if (prob.num_levels() > 8)
    throw std::invalid_argument("block oracle: more than 8 levels");

  // Sorted positive-weight levels, no pooling: the oracle stays agnostic
  // about tie fusion and lets enumeration decide.
  std::vector<int> idx;
  for (int k = 0; k < prob.num_levels(); ++k)
    if (prob.weights[k] > 0.0) idx.push_back(k);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (prob.targets[a] != prob.targets[b]) return prob.targets[a] < prob.targets[b];
    return a < b;
  });
  std::vector<Unit> units;
  units.reserve(idx.size());
  for (int k : idx) {
    Unit u;
    u.weight = prob.weights[k];
    u.target = prob.targets[k];
    u.levels.push_back(k);
    units.push_back(std::move(u));
  }
  const int m = static_cast<int>(units.size());
  const double n = prob.n_total, lambda = prob.lambda, gamma = prob.gamma;

  double tmin = units.front().target, tmax = units.back().target;

  double best_obj = kInf;
  Clusters best_cl;
  std::vector<double> best_v;

  std::vector<double> W, T;
  const int kGrid = 9;
  std::vector<double> grid(kGrid);
  for (int g = 0; g < kGrid; ++g)
    grid[g] = tmin + (tmax - tmin) * g / (kGrid - 1.0);

  for (unsigned mask = 0; mask < (1u << (m - 1)); ++mask) {
    Clusters cl = Clusters::from_boundary_mask(mask, m);
    cluster_stats(cl, units, W, T);
    const int C = cl.count;

    // Dense monotone grid search.
    std::vector<double> tuple(C), best_tuple(T);
    double best_grid = unit_objective(units, cl, T, n, lambda, gamma);
    std::vector<int> gi(C, 0);
    while (true) {
      for (int c = 0; c < C; ++c) tuple[c] = grid[gi[c]];
      const double o = unit_objective(units, cl, tuple, n, lambda, gamma);
      if (o < best_grid) {
        best_grid = o;
        best_tuple = tuple;
      }
      int c = C - 1;
      while (c >= 0) {
        ++gi[c];
        if (gi[c] < kGrid) break;
        --c;
      }
      if (c < 0) break;
      for (int r = c + 1; r < C; ++r) gi[r] = gi[c];  // keep tuples monotone
    }

    // Coordinate-descent refinement from the cluster means and from the best
    // grid point.
    for (int start = 0; start < 2; ++start) {
      std::vector<double> v = start == 0 ? T : best_tuple;
      cd_cluster_values(W, T, n, lambda, gamma, v);
      for (int c = 1; c < C; ++c) v[c] = std::max(v[c], v[c - 1]);
      const double o = unit_objective(units, cl, v, n, lambda, gamma);
      if (o < best_obj) {
        best_obj = o;
        best_cl = cl;
        best_v = v;
      }
    }
  }
  return finalize_solution(prob, units, best_cl, best_v);
}

}  // namespace catfuse
