#include "treediff/verify.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <set>

namespace treediff {

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt(Cplx z) {
  if (z.imag() == 0.0) return fmt(z.real());
  return fmt(z.real()) + (z.imag() < 0 ? "" : "+") + fmt(z.imag()) + "i";
}

// Collects assertions for one check and settles its status at the end.
struct Ctx {
  CheckResult result;

  Ctx(std::string id, std::string title) {
    result.id = std::move(id);
    result.title = std::move(title);
  }

  void near(const std::string& what, double expected, double computed,
            double tolerance = 1e-12) {
    bool ok = std::abs(expected - computed) <= tolerance;
    result.assertions.push_back({what, fmt(expected), fmt(computed), tolerance, ok});
  }

  void exact(const std::string& what, double expected, double computed) {
    near(what, expected, computed, 0.0);
  }

  void count(const std::string& what, std::uint64_t expected, std::uint64_t computed) {
    result.assertions.push_back({what, std::to_string(expected), std::to_string(computed),
                                 0.0, expected == computed});
  }

  void is_true(const std::string& what, bool ok, const std::string& computed = "") {
    result.assertions.push_back(
        {what, "true", computed.empty() ? (ok ? "true" : "false") : computed, 0.0, ok});
  }

  void equal_str(const std::string& what, const std::string& expected,
                 const std::string& computed) {
    result.assertions.push_back({what, expected, computed, 0.0, expected == computed});
  }

  CheckResult finish() {
    for (const auto& a : result.assertions)
      if (!a.pass) result.status = CheckResult::Status::Fail;
    return std::move(result);
  }
};

CheckResult skipped(std::string id, std::string title, std::string reason) {
  CheckResult r;
  r.id = std::move(id);
  r.title = std::move(title);
  r.status = CheckResult::Status::Skip;
  r.note = std::move(reason);
  return r;
}

std::vector<TreeShape> pick_shapes(const VerifyOptions& o, std::vector<TreeShape> defaults) {
  if (o.shape) return {*o.shape};
  return defaults;
}

// Hardy checks need a homogeneous shape; a filter on anything else skips
// them, a filter on homogeneous:q pins that q alone.
std::optional<std::vector<std::uint32_t>> pick_hardy_qs(const VerifyOptions& o) {
  if (!o.shape) return std::vector<std::uint32_t>{1, 2, 3};
  if (o.shape->kind() == TreeShape::Kind::Homogeneous)
    return std::vector<std::uint32_t>{o.shape->homogeneous_q()};
  return std::nullopt;
}

std::mt19937_64 seeded(const VerifyOptions& o, std::uint64_t salt) {
  return std::mt19937_64(o.seed * 1000003ull + salt);
}

const Vertex& witness_vertex(const NormReport& r) { return std::get<Vertex>(r.witness); }

// ---- check 1: characteristic-function norms ---------------------------

CheckResult check_characteristic_norms(const VerifyOptions& o) {
  Ctx ctx("char-norms", "Lipschitz norms of characteristic functions");
  for (const TreeShape& shape : pick_shapes(
           o, {TreeShape::homogeneous(2), TreeShape::constant_children(2)})) {
    std::string tag = " [" + shape.to_string() + "]";
    NormReport root_report =
        lipschitz_partial_norm(TreeFunction::characteristic(Vertex::root()), shape, 3);
    ctx.near("|chi_o|" + tag, 2.0, root_report.value());
    ctx.is_true("|chi_o| attained" + tag, root_report.attained_exactly);
    ctx.equal_str("|chi_o| witness" + tag, level_vertex(shape, 1, 0).to_string(),
                  witness_vertex(root_report).to_string());
    for (const Vertex& w :
         {Vertex({0}), Vertex({0, 1}), Vertex({1, 0, 1})}) {
      int depth = static_cast<int>(w.length()) + 2;
      NormReport r =
          lipschitz_partial_norm(TreeFunction::characteristic(w), shape, depth);
      ctx.near("|chi_" + w.to_string() + "|" + tag, 1.0, r.value());
      ctx.is_true("|chi_" + w.to_string() + "| attained" + tag, r.attained_exactly);
      ctx.equal_str("|chi_" + w.to_string() + "| witness" + tag, w.to_string(),
                    witness_vertex(r).to_string());
    }
  }
  return ctx.finish();
}

// ---- check 2: derivative norm witness and second derivative pattern ----

CheckResult check_derivative_witness(const VerifyOptions& o) {
  Ctx ctx("derivative-witness", "derivative of characteristic functions: norm and pattern");
  for (const TreeShape& shape : pick_shapes(
           o, {TreeShape::homogeneous(2), TreeShape::constant_children(2)})) {
    std::string tag = " [" + shape.to_string() + "]";
    for (const Vertex& w : {Vertex({0}), Vertex({1, 0})}) {
      int depth = static_cast<int>(w.length()) + 2;
      TreeFunction chi = TreeFunction::characteristic(w);
      WitnessResult wr = operator_norm_lower_witness(
          OperatorDescriptor::differentiation(), {{"chi:" + w.to_string(), chi}},
          SpaceDesc::lipschitz(), shape, depth);
      ctx.near("|D chi_" + w.to_string() + "| / |chi_" + w.to_string() + "|" + tag, 2.0,
               wr.value);
      ctx.is_true("ratio certified" + tag, wr.certified);

      // Second derivative: 1 at w and its grandchildren, -2 at its
      // children, 0 everywhere else. Checked against full enumeration.
      TreeFunction second = derivative(derivative(chi, shape), shape);
      std::set<Vertex> child_set, grandchild_set;
      for (const Vertex& u : children(shape, w)) {
        child_set.insert(u);
        for (const Vertex& g : children(shape, u)) grandchild_set.insert(g);
      }
      std::uint64_t mismatches = 0, scanned = 0;
      for (int d = 0; d <= depth; ++d) {
        for_each_level_vertex(shape, d, [&](const Vertex& v, std::uint64_t) {
          Cplx expected = 0.0;
          if (v == w || grandchild_set.count(v)) expected = 1.0;
          if (child_set.count(v)) expected = -2.0;
          if (std::abs(second.evaluate(v) - expected) > 1e-12) ++mismatches;
          ++scanned;
        });
      }
      ctx.count("second-derivative pattern mismatches over " + std::to_string(scanned) +
                    " vertices" + tag,
                0, mismatches);
    }
  }
  return ctx.finish();
}

// ---- check 3: shift displacement bound ---------------------------------

CheckResult check_shift_bound(const VerifyOptions& o) {
  Ctx ctx("shift-bound", "backward shift displacement bound by depth");
  for (const TreeShape& shape : pick_shapes(
           o, {TreeShape::homogeneous(1), TreeShape::homogeneous(2),
               TreeShape::homogeneous(3), TreeShape::constant_children(1),
               TreeShape::constant_children(2), TreeShape::constant_children(3),
               TreeShape::per_level({2, 3, 1})})) {
    std::string tag = " [" + shape.to_string() + "]";
    ctx.exact("bound at depth 1" + tag, 0.0, lipschitz_shift_bound(shape, 1));
    bool all_one = true;
    for (int depth = 2; depth <= 8; ++depth)
      if (lipschitz_shift_bound(shape, depth) != 1.0) all_one = false;
    ctx.is_true("bound equals 1 at depths 2..8" + tag, all_one);
  }
  return ctx.finish();
}

// ---- check 4: geometric weights give exact operator norm ---------------

CheckResult check_weighted_exact(const VerifyOptions& o) {
  TreeShape shape = o.shape ? *o.shape : TreeShape::homogeneous(2);
  Ctx ctx("weighted-exact", "geometric weights: unit witness and exact bounds");
  int depth = std::max(o.depth, 2);
  for (double M : {1.5, 2.0, 3.0}) {
    std::string tag = " [M=" + fmt(M) + "]";
    Weight mu = Weight::parse("expr:pow(M-1,n)", {{"M", M}});
    bool ratios_ok = true;
    for (int n = 1; n <= depth; ++n)
      if (std::abs(mu.at_level(n) / mu.at_level(n - 1) - (M - 1)) > 1e-12)
        ratios_ok = false;
    ctx.is_true("level ratio equals M-1 at every level" + tag, ratios_ok);

    TreeFunction g = TreeFunction::alternating_witness(mu);
    NormReport gn = weighted_partial_norm(g, mu, shape, depth);
    ctx.near("alternating witness norm" + tag, 1.0, gn.value());
    ctx.is_true("alternating witness norm attained" + tag, gn.attained_exactly);

    NormBounds bounds =
        operator_norm_bounds(SpaceDesc::weighted(mu), shape, depth);
    ctx.near("upper bound equals M" + tag, M, bounds.upper);
    ctx.near("witnessed lower bound equals M" + tag, M, bounds.lower);

    WitnessResult wr = operator_norm_lower_witness(
        OperatorDescriptor::differentiation(), {{"alt-witness", g}},
        SpaceDesc::weighted(mu), shape, depth);
    ctx.is_true("lower bound certified" + tag, wr.certified);
  }
  return ctx.finish();
}

// ---- check 5: divergence signal for the odd-level weight ---------------

CheckResult check_unbounded_signal(const VerifyOptions& o) {
  TreeShape shape = o.shape ? *o.shape : TreeShape::homogeneous(2);
  Ctx ctx("unbounded-signal", "odd-level weight: growing partials and divergence signal");
  Weight mu = Weight::parse("expr:ifodd(n,1)", {});

  NormReport r10 = weighted_ratio_sup(mu, shape, 10);
  ctx.exact("ratio sup at depth 10", 9.0, r10.value());
  NormReport r11 = weighted_ratio_sup(mu, shape, 11);
  ctx.exact("ratio sup at depth 11", 11.0, r11.value());
  ctx.is_true("truncated sups are not flagged exact", !r10.attained_exactly);

  bool odd_partials_ok = true;
  for (const auto& p : r11.partials) {
    double expected = p.depth == 1 ? 1.0
                      : p.depth % 2 == 1
                          ? static_cast<double>(p.depth)
                          : std::max(1.0, static_cast<double>(p.depth - 1));
    if (p.value != expected) odd_partials_ok = false;
  }
  ctx.is_true("partial sups follow the odd-level staircase", odd_partials_ok);

  bool survived_below_cap = true;
  try {
    weighted_ratio_sup(mu, shape, 10, 10.0);
  } catch (const UnboundedOperatorError&) {
    survived_below_cap = false;
  }
  ctx.is_true("cap 10 is quiet through depth 10", survived_below_cap);

  bool signaled = false;
  int sig_depth = 0;
  double sig_value = 0.0;
  try {
    weighted_ratio_sup(mu, shape, 12, 10.0);
  } catch (const UnboundedOperatorError& e) {
    signaled = true;
    sig_depth = e.depth();
    sig_value = e.value();
  }
  ctx.is_true("cap 10 raises the divergence signal by depth 12", signaled);
  ctx.count("signal depth", 11, sig_depth);
  ctx.exact("signal value", 11.0, sig_value);
  return ctx.finish();
}

// ---- check 6: Hardy witness means ---------------------------------------

CheckResult check_hardy_witness(const VerifyOptions& o) {
  auto qs = pick_hardy_qs(o);
  if (!qs)
    return skipped("hardy-witness", "Hardy witness level means",
                   "Hardy spaces live on homogeneous shapes; filtered shape is " +
                       o.shape->to_string());
  Ctx ctx("hardy-witness", "Hardy witness level means");
  TreeFunction f = TreeFunction::hardy_witness();
  for (std::uint32_t q : *qs) {
    TreeShape shape = TreeShape::homogeneous(q);
    TreeFunction df = derivative(f, shape);
    for (double p : {1.0, 2.0, 3.0}) {
      std::string tag = " [q=" + std::to_string(q) + ",p=" + fmt(p) + "]";
      HardyParams par{q, p};
      const double f_means[5] = {1, 1, 0, 0, 0};
      const double df_means[5] = {0, 2, 1, 0, 0};
      bool means_ok = true;
      for (std::size_t n = 0; n <= 4; ++n) {
        if (std::abs(hardy_level_mean(f, par, n) - f_means[n]) > 1e-12) means_ok = false;
        if (std::abs(hardy_level_mean(df, par, n) - df_means[n]) > 1e-12) means_ok = false;
      }
      ctx.is_true("means are (1,1,0,..) and (0,2,1,0,..)" + tag, means_ok);

      NormReport fn = hardy_partial_norm(f, par, 4);
      NormReport dfn = hardy_partial_norm(df, par, 4);
      ctx.near("witness norm" + tag, 1.0, fn.value());
      ctx.near("derivative norm" + tag, 2.0, dfn.value());
      ctx.is_true("both norms attained" + tag,
                  fn.attained_exactly && dfn.attained_exactly);
      ctx.count("derivative norm witness level" + tag, 1,
                std::get<std::uint64_t>(dfn.witness));

      WitnessResult wr = operator_norm_lower_witness(
          OperatorDescriptor::differentiation(), {{"hardy-witness", f}},
          SpaceDesc::hardy(par), shape, 4);
      ctx.near("ratio" + tag, 2.0, wr.value);
      ctx.is_true("ratio certified" + tag, wr.certified);
    }
  }
  return ctx.finish();
}

// ---- check 7: Hardy level factor is identically 1 ----------------------

CheckResult check_hardy_alpha(const VerifyOptions& o) {
  auto qs = pick_hardy_qs(o);
  if (!qs)
    return skipped("hardy-alpha", "Hardy composition level factor",
                   "Hardy spaces live on homogeneous shapes; filtered shape is " +
                       o.shape->to_string());
  Ctx ctx("hardy-alpha", "Hardy composition level factor");
  for (std::uint32_t q : *qs) {
    std::string tag = " [q=" + std::to_string(q) + "]";
    bool all_one = true;
    for (std::uint64_t n = 0; n <= 12; ++n)
      if (hardy_alpha(q, n) != 1.0) all_one = false;
    ctx.is_true("alpha_n == 1 for n <= 12" + tag, all_one);
    ctx.exact("alpha sup" + tag, 1.0, hardy_alpha_sup(q, 12));
    ctx.count("preimage count at (0,0)" + tag, 1, hardy_preimage_count(q, 0, 0));
    ctx.count("preimage count at (0,1)" + tag, q + 1, hardy_preimage_count(q, 0, 1));
    ctx.count("preimage count at (3,4)" + tag, q, hardy_preimage_count(q, 3, 4));
    ctx.count("preimage count off the band (0,2)" + tag, 0, hardy_preimage_count(q, 0, 2));
    ctx.count("preimage count off the band (2,2)" + tag, 0, hardy_preimage_count(q, 2, 2));
    for (double p : {1.0, 2.0, 3.0}) {
      NormBounds b = operator_norm_bounds(SpaceDesc::hardy({q, p}),
                                          TreeShape::homogeneous(q), 4);
      ctx.near("derivative norm upper bound" + tag + "[p=" + fmt(p) + "]", 2.0, b.upper);
      ctx.near("derivative norm witnessed lower bound" + tag + "[p=" + fmt(p) + "]", 2.0,
               b.lower);
    }
  }
  return ctx.finish();
}

// ---- check 8: eigenvalue classification --------------------------------

CheckResult check_eigen(const VerifyOptions& o) {
  TreeShape shape = o.shape ? *o.shape : TreeShape::homogeneous(2);
  int depth = std::max(o.depth, 2);
  Ctx ctx("eigen-grid", "eigenvalue classification at the origin and on a grid");
  using Verdict = EigenClassification::Verdict;

  auto with_constants = SpaceDesc::lipschitz().contains_constants();
  ctx.is_true("Lipschitz space contains constants (exactly known)",
              with_constants.contains && with_constants.exact);
  EigenClassification zero_in =
      eigen_classify(Cplx(0.0), shape, depth, with_constants.contains);
  ctx.is_true("lambda=0 on a space with constants: constants only",
              zero_in.verdict == Verdict::ConstantsOnly);

  Weight growing = Weight::parse("expr:pow(2,n)", {});
  auto no_constants = SpaceDesc::weighted(growing).contains_constants();
  ctx.is_true("doubling weight excludes constants (exactly known)",
              !no_constants.contains && no_constants.exact);
  EigenClassification zero_out =
      eigen_classify(Cplx(0.0), shape, depth, no_constants.contains);
  ctx.is_true("lambda=0 without constants: only the zero function",
              zero_out.verdict == Verdict::OnlyZeroFunction);

  std::vector<Cplx> grid = {Cplx(1.0), Cplx(2.0)};
  for (int i = 0; i < 10 && grid.size() < 100; ++i)
    for (int j = 0; j < 10 && grid.size() < 100; ++j)
      grid.emplace_back(-3.0 + i * (2.0 / 3.0), -3.0 + j * (2.0 / 3.0));
  std::uint64_t wrong_verdict = 0, nonzero_trace = 0;
  for (Cplx lambda : grid) {
    EigenClassification c = eigen_classify(lambda, shape, depth, true);
    if (c.verdict != Verdict::OnlyZeroFunction) ++wrong_verdict;
    for (const auto& entry : c.trace)
      if (entry.second != Cplx(0.0)) ++nonzero_trace;
  }
  ctx.count("grid points (of " + std::to_string(grid.size()) +
                ") misclassified away from only-zero",
            0, wrong_verdict);
  ctx.count("nonzero forced values across all grid traces", 0, nonzero_trace);
  return ctx.finish();
}

// ---- check 9: Hardy norms of constants ----------------------------------

CheckResult check_hardy_constants(const VerifyOptions& o) {
  auto qs = pick_hardy_qs(o);
  if (!qs)
    return skipped("hardy-constants", "Hardy norms of constant functions",
                   "Hardy spaces live on homogeneous shapes; filtered shape is " +
                       o.shape->to_string());
  Ctx ctx("hardy-constants", "Hardy norms of constant functions");
  auto rng = seeded(o, 9);
  std::vector<Cplx> values = {Cplx(1.0), Cplx(-2.0), Cplx(0.5, 0.5)};
  for (int i = 0; i < 3; ++i)
    values.emplace_back(rnd01(rng) * 4 - 2, rnd01(rng) * 4 - 2);
  for (std::uint32_t q : *qs) {
    for (double p : {1.0, 2.0, 3.0}) {
      HardyParams par{q, p};
      std::string tag = " [q=" + std::to_string(q) + ",p=" + fmt(p) + "]";
      std::uint64_t bad = 0;
      for (Cplx c : values) {
        NormReport r = hardy_partial_norm(TreeFunction::constant(c), par, 5);
        if (std::abs(r.value() - std::abs(c)) > 1e-12) ++bad;
        if (!r.attained_exactly) ++bad;
        for (const auto& partial : r.partials)
          if (std::abs(partial.value - std::abs(c)) > 1e-12) ++bad;
      }
      ctx.count("deviations from |c| across " + std::to_string(values.size()) +
                    " constants" + tag,
                0, bad);
    }
  }
  return ctx.finish();
}

// ---- check 10: truncation matrices --------------------------------------

CheckResult check_truncation_matrix(const VerifyOptions& o) {
  TreeShape pinned = TreeShape::homogeneous(2);
  if (o.shape && !(*o.shape == pinned))
    return skipped("truncation-matrix", "truncation matrices at depth 3",
                   "pinned to homogeneous:2; filtered shape is " + o.shape->to_string());
  Ctx ctx("truncation-matrix", "truncation matrices at depth 3");
  TruncationMatrix mi = truncation_matrix(OperatorDescriptor::identity(), pinned, 3);
  TruncationMatrix md = truncation_matrix(OperatorDescriptor::differentiation(), pinned, 3);
  TruncationMatrix mcb =
      truncation_matrix(OperatorDescriptor::backward_composition(), pinned, 3);

  ctx.count("dimension (levels 0..3 of homogeneous:2)", 22, md.dim);
  ctx.is_true("bases agree and are level-lex sorted",
              mi.basis == md.basis && md.basis == mcb.basis &&
                  std::is_sorted(md.basis.begin(), md.basis.end()));
  ctx.is_true("all three matrices are lower triangular",
              mi.lower_triangular() && md.lower_triangular() && mcb.lower_triangular());

  auto diag_cb = mcb.diagonal();
  auto diag_d = md.diagonal();
  bool cb_diag_ok = diag_cb[0] == Cplx(1.0);
  bool d_diag_ok = diag_d[0] == Cplx(0.0);
  for (std::size_t i = 1; i < md.dim; ++i) {
    if (diag_cb[i] != Cplx(0.0)) cb_diag_ok = false;
    if (diag_d[i] != Cplx(1.0)) d_diag_ok = false;
  }
  ctx.is_true("composition diagonal is (1, 0, ..., 0)", cb_diag_ok);
  ctx.is_true("differentiation diagonal is (0, 1, ..., 1)", d_diag_ok);

  auto eig_cb = mcb.eigenvalues();
  ctx.is_true("composition eigenvalues are 0 (x21) and 1 (x1)",
              eig_cb.size() == 2 && eig_cb[0] == std::pair(Cplx(0.0), std::size_t(21)) &&
                  eig_cb[1] == std::pair(Cplx(1.0), std::size_t(1)));
  auto eig_d = md.eigenvalues();
  ctx.is_true("differentiation eigenvalues are 0 (x1) and 1 (x21)",
              eig_d.size() == 2 && eig_d[0] == std::pair(Cplx(0.0), std::size_t(1)) &&
                  eig_d[1] == std::pair(Cplx(1.0), std::size_t(21)));

  std::uint64_t additivity_breaks = 0;
  for (std::size_t i = 0; i < md.dim; ++i)
    for (std::size_t j = 0; j < md.dim; ++j)
      if (md.at(i, j) + mcb.at(i, j) != mi.at(i, j)) ++additivity_breaks;
  ctx.count("entries where D + Cb differs from I", 0, additivity_breaks);
  return ctx.finish();
}

// ---- check 11: independent routes agree ---------------------------------

CheckResult check_oracles(const VerifyOptions& o) {
  Ctx ctx("oracle-routes", "independent computation routes agree");
  auto rng = seeded(o, 11);

  // Radial fast path vs full enumeration for Hardy means.
  if (auto qs = pick_hardy_qs(o)) {
    for (std::uint32_t q : *qs) {
      std::vector<TreeFunction> radials = {
          TreeFunction::hardy_witness(), TreeFunction::constant(Cplx(0.7, -0.3)),
          TreeFunction::from_expr(parse_expr("n/(n+1)"), {}, "n/(n+1)")};
      std::uint64_t bad = 0;
      for (double p : {1.0, 2.0, 3.0}) {
        HardyParams par{q, p};
        for (const TreeFunction& f : radials)
          for (std::size_t n = 0; n <= 6; ++n) {
            double fast = hardy_level_mean(f, par, n);
            double slow = hardy_level_mean_by_enumeration(f, par, n);
            if (std::abs(fast - slow) > 1e-12 * std::max(1.0, std::abs(fast))) ++bad;
          }
      }
      ctx.count("radial fast path vs enumeration mismatches [q=" + std::to_string(q) + "]",
                0, bad);

      // Sparse support skipping vs dense walk, which must agree bit for bit.
      TreeShape shape = TreeShape::homogeneous(q);
      std::uint64_t sparse_bad = 0;
      for (int trial = 0; trial < 5; ++trial) {
        TreeFunction f = random_sparse_function(shape, 5, 6, rng);
        TreeFunction dense = TreeFunction::rule(
            [f](const Vertex& v) { return f.evaluate(v); }, "dense view", false);
        for (std::size_t n = 0; n <= 5; ++n) {
          HardyParams par{q, 2.0};
          if (hardy_level_mean_by_enumeration(f, par, n) !=
              hardy_level_mean_by_enumeration(dense, par, n))
            ++sparse_bad;
        }
      }
      ctx.count("sparse shortcut vs dense walk bit mismatches [q=" + std::to_string(q) + "]",
                0, sparse_bad);

      // Preimage counts: closed form vs census over the truncated tree.
      std::uint64_t census_bad = 0;
      for (std::uint64_t n = 0; n <= 5; ++n) {
        std::map<Vertex, std::uint64_t> per_parent;
        for_each_level_vertex(shape, n, [&](const Vertex& v, std::uint64_t) {
          per_parent[backward_shift(v)] += 1;
        });
        for (std::uint64_t m = 0; m <= 5; ++m) {
          std::uint64_t biggest = 0;
          for (const auto& [w, cnt] : per_parent)
            if (w.length() == m) biggest = std::max(biggest, cnt);
          if (biggest != hardy_preimage_count(q, m, n)) ++census_bad;
        }
      }
      ctx.count("preimage closed form vs census mismatches [q=" + std::to_string(q) + "]",
                0, census_bad);
    }
  } else {
    ctx.result.note = "Hardy-route oracles skipped: filtered shape is " +
                      o.shape->to_string() + "; remaining oracles ran";
  }

  // Truncation matrices vs direct application to basis functions.
  for (const TreeShape& shape : pick_shapes(
           o, {TreeShape::homogeneous(2), TreeShape::constant_children(2)})) {
    for (const char* name : {"I", "D", "Cb"}) {
      OperatorDescriptor op = OperatorDescriptor::parse(name);
      TruncationMatrix m = truncation_matrix(op, shape, 3);
      std::map<Vertex, std::size_t> index;
      for (std::size_t i = 0; i < m.dim; ++i) index[m.basis[i]] = i;
      std::uint64_t bad = 0;
      for (std::size_t j = 0; j < m.dim; ++j) {
        TreeFunction image =
            apply(op, TreeFunction::characteristic(m.basis[j]), shape);
        // Entries of column j must match the image coefficients exactly,
        // with anything beyond the truncation depth dropped.
        std::map<std::size_t, Cplx> expected;
        for (const auto& [v, c] : image.sparse_entries()) {
          auto it = index.find(v);
          if (it != index.end()) expected[it->second] = c;
        }
        for (std::size_t i = 0; i < m.dim; ++i) {
          Cplx want = expected.count(i) ? expected[i] : Cplx(0.0);
          if (m.at(i, j) != want) ++bad;
        }
      }
      ctx.count(std::string("matrix vs basis-image mismatches [") + name + ", " +
                    shape.to_string() + "]",
                0, bad);
    }

    // Derivative computed on a sparse representation vs the same values
    // wrapped in an opaque rule.
    std::uint64_t repr_bad = 0;
    for (int trial = 0; trial < 5; ++trial) {
      TreeFunction f = random_sparse_function(shape, 3, 5, rng);
      TreeFunction wrapped = TreeFunction::rule(
          [f](const Vertex& v) { return f.evaluate(v); }, "rule view", false);
      TreeFunction df = derivative(f, shape);
      TreeFunction dwrapped = derivative(wrapped, shape);
      for (int d = 0; d <= 4; ++d)
        for_each_level_vertex(shape, d, [&](const Vertex& v, std::uint64_t) {
          if (std::abs(df.evaluate(v) - dwrapped.evaluate(v)) > 1e-12) ++repr_bad;
        });
    }
    ctx.count("derivative representation mismatches [" + shape.to_string() + "]", 0,
              repr_bad);
  }
  return ctx.finish();
}

// ---- check 12: point evaluation bounds ----------------------------------

CheckResult check_point_bounds(const VerifyOptions& o) {
  Ctx ctx("point-bounds", "norm-implied growth caps on random sparse functions");
  auto rng = seeded(o, 12);
  TreeShape base_shape = o.shape ? *o.shape : TreeShape::homogeneous(2);

  struct Case {
    std::string name;
    SpaceDesc space;
    TreeShape shape;
  };
  std::vector<Case> cases;
  cases.push_back({"lipschitz", SpaceDesc::lipschitz(), base_shape});
  cases.push_back({"weighted M=3",
                   SpaceDesc::weighted(Weight::parse("expr:pow(M-1,n)", {{"M", 3.0}})),
                   base_shape});
  if (auto qs = pick_hardy_qs(o)) {
    HardyParams par{qs->front(), 2.0};
    cases.push_back({"hardy q=" + std::to_string(par.q), SpaceDesc::hardy(par),
                     TreeShape::homogeneous(par.q)});
  } else {
    ctx.result.note = "Hardy case skipped: filtered shape is " + o.shape->to_string();
  }

  for (const Case& c : cases) {
    std::uint64_t violations = 0, uncertified = 0;
    for (int trial = 0; trial < 100; ++trial) {
      TreeFunction f = random_sparse_function(c.shape, 5, 1 + trial % 6, rng);
      std::size_t lvl = static_cast<std::size_t>(rnd01(rng) * 6);
      if (lvl > 5) lvl = 5;
      std::uint64_t size = c.shape.level_size(lvl);
      Vertex v = level_vertex(c.shape, lvl,
                              static_cast<std::uint64_t>(rnd01(rng) * size) % size);
      PointEvalCheck pc = point_eval_bound_check(c.space, f, v, c.shape, 6);
      if (!pc.holds) ++violations;
      if (!pc.norm_attained) ++uncertified;
    }
    ctx.count("bound violations over 100 trials [" + c.name + "]", 0, violations);
    ctx.count("trials with non-exact norms [" + c.name + "]", 0, uncertified);
  }
  return ctx.finish();
}

// ---- check 13: differentiation is not an isometry -----------------------

CheckResult check_non_isometry(const VerifyOptions& o) {
  Ctx ctx("non-isometry", "unit-norm inputs whose image norm moves away from 1");
  TreeShape shape = o.shape ? *o.shape : TreeShape::homogeneous(2);
  int depth = std::max(o.depth, 3);

  auto report = [&](const std::string& name, const SpaceDesc& space,
                    const TreeShape& s, const TreeFunction& f, double in_expect,
                    double out_expect) {
    NormReport in = space.norm(f, s, depth);
    NormReport out = space.norm(
        apply(OperatorDescriptor::differentiation(), f, s), s, depth);
    ctx.near("input norm [" + name + "]", in_expect, in.value());
    ctx.near("image norm [" + name + "]", out_expect, out.value());
    ctx.is_true("both norms attained [" + name + "]",
                in.attained_exactly && out.attained_exactly);
    ctx.is_true("norm moved by more than 0.5 [" + name + "]",
                std::abs(in.value() - out.value()) > 0.5);
  };

  report("lipschitz, constant 1", SpaceDesc::lipschitz(), shape,
         TreeFunction::constant(1.0), 1.0, 0.0);
  Weight mu = Weight::parse("expr:pow(M-1,n)", {{"M", 3.0}});
  report("weighted M=3, chi_o", SpaceDesc::weighted(mu), shape,
         TreeFunction::characteristic(Vertex::root()), 1.0, 2.0);
  if (auto qs = pick_hardy_qs(o)) {
    HardyParams par{qs->front(), 2.0};
    report("hardy q=" + std::to_string(par.q) + ", constant 1", SpaceDesc::hardy(par),
           TreeShape::homogeneous(par.q), TreeFunction::constant(1.0), 1.0, 0.0);
  } else {
    ctx.result.note = "Hardy case skipped: filtered shape is " + o.shape->to_string();
  }
  return ctx.finish();
}

// ---- check 14: expression language --------------------------------------

CheckResult check_expressions(const VerifyOptions& o) {
  Ctx ctx("expression-dsl", "expression parsing, precedence, errors, round-trips");

  auto value = [](const char* text, std::uint64_t n = 0, ParamEnv env = {}) {
    return eval_radial(parse_expr(text), n, env);
  };
  ctx.exact("2+3*4", 14.0, value("2+3*4"));
  ctx.exact("2*3^2", 18.0, value("2*3^2"));
  ctx.exact("-2^2", -4.0, value("-2^2"));
  ctx.exact("(2+3)*4", 20.0, value("(2+3)*4"));
  ctx.exact("2^3^2 (right associative)", 512.0, value("2^3^2"));
  ctx.exact("pow(M-1,n) at n=2, M=3", 4.0, value("pow(M-1,n)", 2, {{"M", 3.0}}));
  ctx.exact("ifodd(n,1) at n=3", 3.0, value("ifodd(n,1)", 3));
  ctx.exact("ifodd(n,1) at n=4", 1.0, value("ifodd(n,1)", 4));
  ctx.exact("ifzero(5,1/n) at n=0 (lazy branch)", 5.0, value("ifzero(5,1/n)", 0));
  ctx.exact("ifzero(5,1/n) at n=2", 0.5, value("ifzero(5,1/n)", 2));

  auto offset_of = [](const char* text) -> std::int64_t {
    try {
      parse_expr(text);
      return -1;
    } catch (const ParseError& e) {
      return static_cast<std::int64_t>(e.offset());
    }
  };
  ctx.count("offset of lexical error in '2 + $'", 4, offset_of("2 + $"));
  ctx.count("offset of unknown function in 'foo(1,2)'", 0, offset_of("foo(1,2)"));
  ctx.count("offset of arity error in 'pow(1)'", 5, offset_of("pow(1)"));
  ctx.count("offset of arity error in 'min(1,2,3)'", 7, offset_of("min(1,2,3)"));
  ctx.count("offset of trailing input in '1 2'", 2, offset_of("1 2"));

  bool unbound_flagged = false;
  try {
    value("x+1");
  } catch (const ConfigError&) {
    unbound_flagged = true;
  }
  ctx.is_true("unbound parameter raises a config error", unbound_flagged);
  bool div_flagged = false;
  try {
    value("1/0");
  } catch (const EvalError&) {
    div_flagged = true;
  }
  ctx.is_true("division by zero raises an evaluation error", div_flagged);
  bool inf_flagged = false;
  try {
    value("pow(10,400)");
  } catch (const EvalError&) {
    inf_flagged = true;
  }
  ctx.is_true("overflow to infinity raises an evaluation error", inf_flagged);

  auto rng = seeded(o, 14);
  ParamEnv env = {{"a", 2.5}, {"M", 3.0}};
  std::uint64_t ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Expr::Ptr e = random_expression(rng, 3);
    std::string text = format_expr(e);
    Expr::Ptr back = parse_expr(text);
    bool good = format_expr(back) == text;
    for (std::uint64_t n = 0; n <= 20 && good; ++n)
      if (eval_radial(e, n, env) != eval_radial(back, n, env)) good = false;
    if (good) ++ok;
  }
  ctx.count("format/parse round-trips (of 50)", 50, ok);
  return ctx.finish();
}

}  // namespace

TreeFunction random_sparse_function(const TreeShape& shape, int max_depth, int count,
                                    std::mt19937_64& rng) {
  std::map<Vertex, Cplx> entries;
  for (int i = 0; i < count; ++i) {
    std::size_t level = static_cast<std::size_t>(rnd01(rng) * (max_depth + 1));
    if (level > static_cast<std::size_t>(max_depth)) level = max_depth;
    std::vector<std::uint32_t> digits(level);
    for (std::size_t j = 0; j < level; ++j)
      digits[j] = static_cast<std::uint32_t>(rnd01(rng) * shape.branching_at_level(j)) %
                  shape.branching_at_level(j);
    double re = (0.25 + rnd01(rng) * 1.75) * (rnd01(rng) < 0.5 ? -1.0 : 1.0);
    double im = rnd01(rng) * 2.0 * (rnd01(rng) < 0.5 ? -1.0 : 1.0);
    entries[Vertex(std::move(digits))] = Cplx(re, im);
  }
  return TreeFunction::sparse(std::move(entries));
}

Expr::Ptr random_expression(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return static_cast<int>(rnd01(rng) * n) % n; };
  if (depth <= 0) {
    switch (pick(5)) {
      case 0:
        return Expr::number(1 + pick(9));
      case 1:
        return Expr::number((1 + pick(18)) * 0.5);
      case 2:
        return Expr::level_var();
      case 3:
        return Expr::param("a");
      default:
        return Expr::param("M");
    }
  }
  switch (pick(8)) {
    case 0:
      return Expr::neg(random_expression(rng, depth - 1));
    case 1:
      return Expr::binary(Expr::BinOp::Add, random_expression(rng, depth - 1),
                          random_expression(rng, depth - 1));
    case 2:
      return Expr::binary(Expr::BinOp::Sub, random_expression(rng, depth - 1),
                          random_expression(rng, depth - 1));
    case 3:
      return Expr::binary(Expr::BinOp::Mul, random_expression(rng, depth - 1),
                          random_expression(rng, depth - 1));
    case 4:
      // Positive literal denominators keep every evaluation finite.
      return Expr::binary(Expr::BinOp::Div, random_expression(rng, depth - 1),
                          Expr::number(1 + pick(9)));
    case 5:
      // Small integer exponents keep powers of negatives well defined.
      return Expr::binary(Expr::BinOp::Pow, random_expression(rng, depth - 1),
                          Expr::number(pick(4)));
    case 6:
      return Expr::call(Expr::Builtin::Pow, random_expression(rng, depth - 1),
                        Expr::number(pick(4)));
    default: {
      Expr::Builtin fns[4] = {Expr::Builtin::Min, Expr::Builtin::Max,
                              Expr::Builtin::IfOdd, Expr::Builtin::IfZero};
      return Expr::call(fns[pick(4)], random_expression(rng, depth - 1),
                        random_expression(rng, depth - 1));
    }
  }
}

VerifySummary run_verification(const VerifyOptions& options) {
  VerifySummary summary;
  summary.checks.push_back(check_characteristic_norms(options));
  summary.checks.push_back(check_derivative_witness(options));
  summary.checks.push_back(check_shift_bound(options));
  summary.checks.push_back(check_weighted_exact(options));
  summary.checks.push_back(check_unbounded_signal(options));
  summary.checks.push_back(check_hardy_witness(options));
  summary.checks.push_back(check_hardy_alpha(options));
  summary.checks.push_back(check_eigen(options));
  summary.checks.push_back(check_hardy_constants(options));
  summary.checks.push_back(check_truncation_matrix(options));
  summary.checks.push_back(check_oracles(options));
  summary.checks.push_back(check_point_bounds(options));
  summary.checks.push_back(check_non_isometry(options));
  summary.checks.push_back(check_expressions(options));
  for (const auto& c : summary.checks) {
    switch (c.status) {
      case CheckResult::Status::Pass:
        ++summary.passed;
        break;
      case CheckResult::Status::Fail:
        ++summary.failed;
        break;
      case CheckResult::Status::Skip:
        ++summary.skipped;
        break;
    }
  }
  return summary;
}

}  // namespace treediff
