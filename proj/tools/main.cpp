#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "treediff/verify.hpp"
#include "treediff/version.hpp"

using json = nlohmann::json;
using namespace treediff;

namespace {

struct Common {
  std::string shape_text = "homogeneous:2";
  int depth = 8;
  std::string space_text = "lipschitz";
  std::string weight_text;
  std::vector<std::string> params;
  std::string format = "human";
  std::string output = "-";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_space) {
  sub->add_option("--shape", c.shape_text,
                  "tree shape: homogeneous:q, constant:k or perlevel:a,b,c")
      ->capture_default_str();
  sub->add_option("--depth", c.depth, "truncation depth")->capture_default_str();
  if (with_space) {
    sub->add_option("--space", c.space_text,
                    "function space: lipschitz, weighted:<weight> or hardy:q=..,p=..")
        ->capture_default_str();
    sub->add_option("--weight", c.weight_text,
                    "weight for --space weighted, e.g. expr:pow(2,n) or table:1,2");
  }
  sub->add_option("--param", c.params, "parameter binding K=V, repeatable");
  sub->add_option("--format", c.format, "report format")
      ->check(CLI::IsMember({"json", "tsv", "human"}))
      ->capture_default_str();
  sub->add_option("--output", c.output, "report path, - for stdout")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for randomized report members")
      ->capture_default_str();
}

ParamEnv parse_params(const std::vector<std::string>& params) {
  ParamEnv env;
  for (const std::string& s : params) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("parameter binding must look like K=V, got '" + s + "'");
    std::string key = s.substr(0, eq);
    std::string text = s.substr(eq + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ConfigError("parameter '" + key + "' has a non-numeric value '" + text + "'");
    env[key] = value;
  }
  return env;
}

SpaceDesc resolve_space(const Common& c, const ParamEnv& env) {
  std::string text = c.space_text;
  if (!c.weight_text.empty()) {
    if (text != "weighted")
      throw ConfigError("--weight only applies to --space weighted");
    text += ":" + c.weight_text;
  }
  return SpaceDesc::parse(text, env);
}

TreeShape resolve_shape(const Common& c) { return TreeShape::parse(c.shape_text); }

void validate_depth(const TreeShape& shape, int depth) {
  if (depth < 1) throw ConfigError("depth must be at least 1");
  if (auto m = shape.max_safe_depth(); m && depth > static_cast<int>(*m))
    throw ConfigError("depth " + std::to_string(depth) + " exceeds the safe maximum " +
                      std::to_string(*m) + " for shape " + shape.to_string());
}

Cplx parse_complex(const std::string& text) {
  auto parse_one = [&](const std::string& part) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size())
      throw ConfigError("expected a number, got '" + part + "'");
    return v;
  };
  auto comma = text.find(',');
  if (comma == std::string::npos) return Cplx(parse_one(text), 0.0);
  return Cplx(parse_one(text.substr(0, comma)), parse_one(text.substr(comma + 1)));
}

Cplx complex_from_json(const json& j) {
  double re = j.value("re", 0.0);
  double im = j.value("im", 0.0);
  return Cplx(re, im);
}

TreeFunction function_from_file(const std::string& path, const ParamEnv& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open function file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("function file '" + path + "' is not valid JSON: " + e.what());
  }
  std::string kind = j.value("kind", "");
  if (kind == "expr") {
    std::string text = j.at("text").get<std::string>();
    ParamEnv merged = env;
    if (j.contains("params"))
      for (const auto& [k, v] : j.at("params").items()) merged[k] = v.get<double>();
    return TreeFunction::from_expr(parse_expr(text), merged, "expr:" + text);
  }
  if (kind == "sparse") {
    std::map<Vertex, Cplx> entries;
    for (const json& e : j.at("entries"))
      entries[Vertex::parse(e.at("vertex").get<std::string>())] = complex_from_json(e);
    return TreeFunction::sparse(std::move(entries));
  }
  if (kind == "radial") {
    std::vector<Cplx> values;
    for (const json& e : j.at("values")) values.push_back(complex_from_json(e));
    Cplx tail = j.contains("tail") ? complex_from_json(j.at("tail")) : Cplx(0.0);
    return TreeFunction::radial(std::move(values), tail);
  }
  throw ConfigError("function file '" + path +
                    "' must declare kind expr, sparse or radial");
}

TreeFunction parse_function_spec(const std::string& spec, const SpaceDesc& space,
                                 const ParamEnv& env) {
  if (spec.rfind("chi:", 0) == 0)
    return TreeFunction::characteristic(Vertex::parse(spec.substr(4)));
  if (spec == "hardy-witness") return TreeFunction::hardy_witness();
  if (spec == "alt-witness") {
    if (space.kind() != SpaceDesc::Kind::Weighted)
      throw ConfigError("alt-witness needs a weighted space to supply its weight");
    return TreeFunction::alternating_witness(space.weight());
  }
  if (spec.rfind("constant:", 0) == 0)
    return TreeFunction::constant(parse_complex(spec.substr(9)));
  if (spec.rfind("expr:", 0) == 0)
    return TreeFunction::from_expr(parse_expr(spec.substr(5)), env, spec);
  if (spec.rfind("file:", 0) == 0) return function_from_file(spec.substr(5), env);
  throw ConfigError("unknown function spec '" + spec +
                    "' (use chi:ADDR, hardy-witness, alt-witness, constant:RE[,IM], "
                    "expr:TEXT or file:PATH)");
}

json cplx_json(Cplx z) { return json::array({z.real(), z.imag()}); }

std::string witness_text(const NormWitness& w) {
  if (std::holds_alternative<Vertex>(w)) return std::get<Vertex>(w).to_string();
  return "level:" + std::to_string(std::get<std::uint64_t>(w));
}

json norm_report_json(const NormReport& r) {
  json partials = json::array();
  for (const auto& p : r.partials)
    partials.push_back({{"depth", p.depth}, {"value", p.value}});
  return {{"attained_exactly", r.attained_exactly},
          {"partials", partials},
          {"value", r.value()},
          {"witness", witness_text(r.witness)},
          {"witness_kind", std::holds_alternative<Vertex>(r.witness) ? "vertex" : "level"}};
}

json report_envelope(const std::string& command, const Common& c, const ParamEnv& env,
                     bool with_space, json results) {
  json config = {{"depth", c.depth}, {"format", c.format},
                 {"output", c.output}, {"seed", c.seed},
                 {"shape", c.shape_text}};
  if (with_space) {
    config["space"] = c.space_text;
    if (!c.weight_text.empty()) config["weight"] = c.weight_text;
  }
  json params = json::object();
  for (const auto& [k, v] : env) params[k] = v;
  config["params"] = params;
  return {{"command", command},
          {"config", config},
          {"library_version", library_version},
          {"results", std::move(results)}};
}

bool scalar_array(const json& a) {
  for (const json& v : a)
    if (v.is_object() || v.is_array()) return false;
  return true;
}

std::string inline_str(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += inline_str(v[i]);
    }
    return s + "]";
  }
  return v.dump();
}

void render_human(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object() || (v.is_array() && !scalar_array(v))) {
        os << prefix << k << ":\n";
        render_human(v, prefix + "  ", os);
      } else {
        os << prefix << k << ": " << inline_str(v) << "\n";
      }
    }
  } else if (j.is_array()) {
    for (const json& v : j) {
      if (v.is_object() || (v.is_array() && !scalar_array(v))) {
        os << prefix << "-\n";
        render_human(v, prefix + "  ", os);
      } else {
        os << prefix << "- " << inline_str(v) << "\n";
      }
    }
  } else {
    os << prefix << inline_str(j) << "\n";
  }
}

std::string render_tsv(const json& payload) {
  std::ostringstream os;
  json flat = payload.flatten();
  for (const auto& [k, v] : flat.items()) os << k << "\t" << inline_str(v) << "\n";
  return os.str();
}

// The norm command gets the spreadsheet layout: scalars as key/value rows,
// then one partials table per report with columns depth, value, witness,
// attained.
std::string render_norm_tsv(const json& payload) {
  std::ostringstream os;
  json flat = payload.flatten();
  for (const auto& [k, v] : flat.items())
    if (k.find("/partials/") == std::string::npos) os << k << "\t" << inline_str(v) << "\n";
  for (const char* which : {"input", "image"}) {
    const json& r = payload["results"][which];
    os << "table\t" << which << "_partials\n";
    os << "depth\tvalue\twitness\tattained\n";
    for (const json& p : r["partials"])
      os << p["depth"].dump() << "\t" << p["value"].dump() << "\t"
         << r["witness"].get<std::string>() << "\t"
         << (r["attained_exactly"].get<bool>() ? "true" : "false") << "\n";
  }
  return os.str();
}

std::string render_verify_human(const json& payload) {
  std::ostringstream os;
  const json& r = payload["results"];
  for (const json& c : r["checks"]) {
    std::string status = c["status"].get<std::string>();
    for (char& ch : status) ch = static_cast<char>(std::toupper(ch));
    os << status << " " << c["id"].get<std::string>() << ": "
       << c["title"].get<std::string>();
    if (!c["note"].get<std::string>().empty())
      os << " (" << c["note"].get<std::string>() << ")";
    os << "\n";
    if (c["status"].get<std::string>() == "fail")
      for (const json& a : c["assertions"])
        if (!a["pass"].get<bool>())
          os << "    FAIL " << a["what"].get<std::string>() << ": expected "
             << a["expected"].get<std::string>() << ", computed "
             << a["computed"].get<std::string>() << " (tolerance "
             << a["tolerance"].dump() << ")\n";
  }
  os << "summary: " << r["passed"].dump() << " passed, " << r["failed"].dump()
     << " failed, " << r["skipped"].dump() << " skipped\n";
  return os.str();
}

std::string render(const json& payload, const std::string& format,
                   const std::string& command) {
  if (format == "json") return payload.dump(2) + "\n";
  if (format == "tsv")
    return command == "norm" ? render_norm_tsv(payload) : render_tsv(payload);
  if (command == "verify") return render_verify_human(payload);
  std::ostringstream os;
  render_human(payload, "", os);
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

int cmd_verify(const Common& c, bool shape_given) {
  if (c.depth < 1) throw ConfigError("depth must be at least 1");
  VerifyOptions vo;
  if (shape_given) vo.shape = resolve_shape(c);
  vo.depth = c.depth;
  vo.seed = c.seed;
  VerifySummary s = run_verification(vo);

  json checks = json::array();
  for (const CheckResult& cr : s.checks) {
    json assertions = json::array();
    for (const Assertion& a : cr.assertions)
      assertions.push_back({{"what", a.what},
                            {"expected", a.expected},
                            {"computed", a.computed},
                            {"tolerance", a.tolerance},
                            {"pass", a.pass}});
    const char* status = cr.status == CheckResult::Status::Pass   ? "pass"
                         : cr.status == CheckResult::Status::Fail ? "fail"
                                                                  : "skip";
    checks.push_back({{"id", cr.id},
                      {"title", cr.title},
                      {"status", status},
                      {"note", cr.note},
                      {"assertions", assertions}});
  }
  json results = {{"checks", checks},
                  {"passed", s.passed},
                  {"failed", s.failed},
                  {"skipped", s.skipped},
                  {"all_passed", s.all_passed()}};
  Common echo = c;
  if (!shape_given) echo.shape_text = "(all)";
  write_text(c.output, render(report_envelope("verify", echo, {}, false, results),
                              c.format, "verify"));
  return s.failed > 0 ? 1 : 0;
}

int cmd_norm(const Common& c, const std::string& fn_spec, const std::string& op_spec) {
  TreeShape shape = resolve_shape(c);
  validate_depth(shape, c.depth);
  ParamEnv env = parse_params(c.params);
  SpaceDesc space = resolve_space(c, env);
  TreeShape nshape = space.norm_shape(shape);
  TreeFunction f = parse_function_spec(fn_spec, space, env);
  f.require_valid(nshape);
  OperatorDescriptor op = OperatorDescriptor::parse(op_spec);

  NormReport in = space.norm(f, nshape, c.depth);
  NormReport out = space.norm(apply(op, f, nshape), nshape, c.depth);
  bool ratio_defined = in.value() > 0.0;
  json results = {{"function", fn_spec},
                  {"operator", op.to_string()},
                  {"input", norm_report_json(in)},
                  {"image", norm_report_json(out)},
                  {"ratio_defined", ratio_defined},
                  {"ratio", ratio_defined ? json(out.value() / in.value()) : json()},
                  {"certified",
                   ratio_defined && in.attained_exactly && out.attained_exactly}};
  write_text(c.output,
             render(report_envelope("norm", c, env, true, results), c.format, "norm"));
  return 0;
}

int cmd_alpha(const Common& c, std::uint32_t q, std::uint64_t max_level) {
  if (q < 1) throw ConfigError("q must be at least 1");
  json values = json::array();
  for (std::uint64_t n = 0; n <= max_level; ++n) values.push_back(hardy_alpha(q, n));
  json results = {{"q", q},
                  {"max_level", max_level},
                  {"values", values},
                  {"sup", hardy_alpha_sup(q, max_level)}};
  write_text(c.output,
             render(report_envelope("alpha", c, {}, false, results), c.format, "alpha"));
  return 0;
}

int cmd_eigen(const Common& c, const std::string& lambda_text) {
  TreeShape shape = resolve_shape(c);
  validate_depth(shape, c.depth);
  ParamEnv env = parse_params(c.params);
  SpaceDesc space = resolve_space(c, env);
  auto membership = space.contains_constants();
  Cplx lambda = parse_complex(lambda_text);
  EigenClassification ec = eigen_classify(lambda, shape, c.depth, membership.contains);

  json trace = json::array();
  for (const auto& [v, z] : ec.trace)
    trace.push_back({{"vertex", v.to_string()}, {"value", cplx_json(z)}});
  json results = {{"lambda", cplx_json(lambda)},
                  {"space_has_constants", membership.contains},
                  {"membership_exact", membership.exact},
                  {"membership_note", membership.note},
                  {"verdict", ec.verdict == EigenClassification::Verdict::ConstantsOnly
                                  ? "constants-only"
                                  : "only-zero-function"},
                  {"rationale", ec.rationale},
                  {"trace", trace}};
  write_text(c.output,
             render(report_envelope("eigen", c, env, true, results), c.format, "eigen"));
  return 0;
}

int cmd_spectrum(const Common& c, double cap) {
  TreeShape shape = resolve_shape(c);
  validate_depth(shape, c.depth);
  ParamEnv env = parse_params(c.params);
  SpaceDesc space = resolve_space(c, env);
  SpectrumReport sr = spectrum_bounds(space, shape, c.depth, cap);

  auto disk_json = [](const DiskRegion& d) {
    return json{{"center", cplx_json(d.center)}, {"radius", d.radius}};
  };
  json bounding = json::array();
  for (const DiskRegion& d : sr.bounding) bounding.push_back(disk_json(d));
  json members = json::array();
  for (Cplx z : sr.known_members) members.push_back(cplx_json(z));
  json results = {{"bounding", bounding},
                  {"exact", sr.exact ? disk_json(*sr.exact) : json()},
                  {"known_members", members},
                  {"point_spectrum_zero", sr.point_spectrum_zero},
                  {"point_spectrum_exact", sr.point_spectrum_exact},
                  {"notes", sr.notes}};
  write_text(c.output, render(report_envelope("spectrum", c, env, true, results),
                              c.format, "spectrum"));
  return 0;
}

int cmd_matrix(const Common& c, const std::string& op_spec, std::size_t dim_cap) {
  TreeShape shape = resolve_shape(c);
  validate_depth(shape, c.depth);
  OperatorDescriptor op = OperatorDescriptor::parse(op_spec);
  TruncationMatrix m = truncation_matrix(op, shape, c.depth, dim_cap);

  json basis = json::array();
  for (const Vertex& v : m.basis) basis.push_back(v.to_string());
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"row", e.row}, {"col", e.col}, {"value", cplx_json(e.value)}});
  json diagonal = json::array();
  for (Cplx z : m.diagonal()) diagonal.push_back(cplx_json(z));
  json eigen = json::array();
  for (const auto& [value, mult] : m.eigenvalues())
    eigen.push_back({{"value", cplx_json(value)}, {"multiplicity", mult}});
  json results = {{"operator", op.to_string()},
                  {"dim", m.dim},
                  {"basis", basis},
                  {"entries", entries},
                  {"diagonal", diagonal},
                  {"lower_triangular", m.lower_triangular()},
                  {"eigenvalues", eigen}};
  write_text(c.output, render(report_envelope("matrix", c, {}, false, results),
                              c.format, "matrix"));
  return 0;
}

int cmd_parse(const Common& c, const std::string& text,
              const std::vector<std::uint64_t>& at_levels) {
  ParamEnv env = parse_params(c.params);
  Expr::Ptr e = parse_expr(text);
  json values = json::array();
  for (std::uint64_t n : at_levels)
    values.push_back({{"n", n}, {"value", eval_radial(e, n, env)}});
  json results = {{"input", text},
                  {"canonical", format_expr(e)},
                  {"level_free", is_level_free(*e)},
                  {"values", values}};
  write_text(c.output,
             render(report_envelope("parse", c, env, false, results), c.format, "parse"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiation and backward-shift composition on rooted trees"};
  app.require_subcommand(1);

  Common verify_c, norm_c, alpha_c, eigen_c, spectrum_c, matrix_c, parse_c;

  CLI::App* verify = app.add_subcommand("verify", "run the scientific verification suite");
  add_common(verify, verify_c, false);

  CLI::App* norm = app.add_subcommand("norm", "truncated norms of a function and its image");
  add_common(norm, norm_c, true);
  std::string norm_fn, norm_op = "D";
  norm->add_option("--function", norm_fn,
                   "chi:ADDR, hardy-witness, alt-witness, constant:RE[,IM], expr:TEXT, "
                   "file:PATH")
      ->required();
  norm->add_option("--op", norm_op, "operator: I, D or Cb")->capture_default_str();

  CLI::App* alpha = app.add_subcommand("alpha", "Hardy composition level factors");
  add_common(alpha, alpha_c, false);
  std::uint32_t alpha_q = 2;
  std::uint64_t alpha_n = 12;
  alpha->add_option("--q", alpha_q, "homogeneous tree parameter")->capture_default_str();
  alpha->add_option("--max-level", alpha_n, "largest level")->capture_default_str();

  CLI::App* eigen = app.add_subcommand("eigen", "classify an eigenvalue candidate");
  add_common(eigen, eigen_c, true);
  std::string eigen_lambda;
  eigen->add_option("--lambda", eigen_lambda, "candidate as RE or RE,IM")->required();

  CLI::App* spectrum = app.add_subcommand("spectrum", "spectrum bounding disks");
  add_common(spectrum, spectrum_c, true);
  double spectrum_cap = 1e6;
  spectrum->add_option("--cap", spectrum_cap, "divergence cap for weight ratio sups")
      ->capture_default_str();

  CLI::App* matrix = app.add_subcommand("matrix", "operator matrix on the truncated tree");
  add_common(matrix, matrix_c, false);
  std::string matrix_op = "D";
  std::size_t matrix_cap = 20000;
  matrix->add_option("--op", matrix_op, "operator: I, D or Cb")->capture_default_str();
  matrix->add_option("--matrix-cap", matrix_cap, "largest allowed dimension")
      ->capture_default_str();

  CLI::App* parse = app.add_subcommand("parse", "check an expression in the level DSL");
  add_common(parse, parse_c, false);
  std::string parse_text;
  std::vector<std::uint64_t> parse_at = {0, 1, 2, 3, 4, 5};
  parse->add_option("text", parse_text, "expression text")->required();
  parse->add_option("--at", parse_at, "levels to evaluate at")
      ->delimiter(',')
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(verify_c, verify->count("--shape") > 0);
    if (norm->parsed()) return cmd_norm(norm_c, norm_fn, norm_op);
    if (alpha->parsed()) return cmd_alpha(alpha_c, alpha_q, alpha_n);
    if (eigen->parsed()) return cmd_eigen(eigen_c, eigen_lambda);
    if (spectrum->parsed()) return cmd_spectrum(spectrum_c, spectrum_cap);
    if (matrix->parsed()) return cmd_matrix(matrix_c, matrix_op, matrix_cap);
    if (parse->parsed()) return cmd_parse(parse_c, parse_text, parse_at);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.error_class() == ErrorClass::Config ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
