// crl: validate metric structures, compute Ramsey values with witness
// certificates, search candidate targets, profile group criterion decay,
// and verify certificates independently.
//
// Exit codes: 0 pass, 1 input error, 2 verification failure, 3 exhaustion.

#include "crl/certificate.hpp"
#include "crl/groups.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kFailure = 2;
constexpr int kExhausted = 3;

using crl::Rat;

// Accumulates the run report; every rational is printed as p/q with a
// 12-digit decimal, and the timing line comes last so reports are
// byte-comparable without it.
class RunReport {
 public:
  explicit RunReport(std::string command)
      : start_(std::chrono::steady_clock::now()) {
    lines_.push_back("command " + std::move(command));
  }

  void input(const std::string& label, const std::string& path, const std::string& hash) {
    lines_.push_back("input " + label + " " + path + " " + hash);
  }
  void field(const std::string& name, const std::string& text) {
    lines_.push_back(name + " " + text);
  }
  void rational(const std::string& name, const Rat& r) {
    lines_.push_back(name + " " + crl::rat_report(r));
  }

  void print() const {
    for (const auto& l : lines_) std::cout << l << "\n";
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start_)
                  .count();
    std::cout << "timing-ms " << ms << "\n";
  }

 private:
  std::vector<std::string> lines_;
  std::chrono::steady_clock::time_point start_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Loads and validates one structure; on failure prints the reason and sets
// the exit code (1 parse, 2 invariant violation).
std::optional<crl::MetricStructure> load_structure(const std::string& path, int& code) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    std::cout << "input error: " << e.what() << "\n";
    code = kInputError;
    return std::nullopt;
  }
  crl::MetricStructure s;
  try {
    s = crl::parse_structure_text(text);
  } catch (const crl::ParseError& e) {
    std::cout << "parse error in '" << path << "': " << e.what() << "\n";
    code = kInputError;
    return std::nullopt;
  }
  crl::ValidationReport rep = crl::validate_structure(s);
  if (!rep.pass()) {
    std::cout << "invalid structure '" << path << "':\n" << rep.to_string();
    code = kFailure;
    return std::nullopt;
  }
  return s;
}

Rat parse_epsilon(const std::string& text) {
  Rat eps = crl::parse_rational(text);
  if (eps <= 0 || eps > 1) throw crl::ParseError("epsilon must lie in (0,1], got " + text);
  return eps;
}

int cmd_validate(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  crl::MetricStructure s;
  try {
    s = crl::parse_structure_text(text);
  } catch (const crl::ParseError& e) {
    std::cout << "parse error: " << e.what() << "\n";
    return kInputError;
  }
  crl::ValidationReport rep = crl::validate_structure(s);
  if (!rep.pass()) {
    std::cout << rep.to_string();
    return kFailure;
  }
  std::cout << "ok: " << s.size << " points, " << s.signature.relations.size()
            << " relations, hash " << crl::structure_hash(s) << "\n";
  return kOk;
}

int cmd_value(const std::string& a_path, const std::string& b_path, const std::string& c_path,
              const std::string& mode, const std::string& eps_str, const std::string& cert_path,
              int restarts) {
  RunReport report("value");
  Rat eps;
  try {
    eps = parse_epsilon(eps_str);
  } catch (const crl::ParseError& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  int code = kOk;
  auto sa = load_structure(a_path, code);
  if (!sa) return code;
  auto sb = load_structure(b_path, code);
  if (!sb) return code;
  auto sc = load_structure(c_path, code);
  if (!sc) return code;
  crl::ramsey::RamseyInstance inst{crl::share(std::move(*sa)), crl::share(std::move(*sb)),
                                   crl::share(std::move(*sc)), eps};
  report.input("A", a_path, crl::structure_hash(*inst.a));
  report.input("B", b_path, crl::structure_hash(*inst.b));
  report.input("C", c_path, crl::structure_hash(*inst.c));
  report.field("mode", mode);
  report.rational("epsilon", eps);

  crl::ramsey::Decision d;
  try {
    crl::ramsey::SearchBudget budget;
    if (restarts > 0) budget.restarts = restarts;
    d = crl::ramsey::decide_witness(inst, mode, budget);
  } catch (const std::invalid_argument& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }

  if (d.verdict == crl::ramsey::Verdict::degenerate) {
    report.field("verdict", "DEGENERATE");
    report.field("note", d.note);
    report.print();
    return d.degenerate_kind == crl::ramsey::DegenerateKind::vacuous_pairs ? kOk : kFailure;
  }
  report.rational(mode == "adaptive" ? "lower-bound" : "value", *d.value);
  std::string verdict = d.verdict == crl::ramsey::Verdict::yes ? "YES" : "NO";
  if (d.one_sided) verdict += d.verdict == crl::ramsey::Verdict::yes ? " (one-sided)" : " (conclusive)";
  report.field("verdict", verdict);
  if (!d.note.empty()) report.field("note", d.note);
  if (!cert_path.empty() && d.certificate) {
    try {
      write_file(cert_path,
                 crl::ramsey::serialize_certificate(crl::ramsey::doc_from_witness(*d.certificate)));
    } catch (const std::runtime_error& e) {
      std::cout << "input error: " << e.what() << "\n";
      return kInputError;
    }
    report.field("certificate", cert_path);
  }
  report.print();
  return d.verdict == crl::ramsey::Verdict::yes ? kOk : kFailure;
}

int cmd_search(const std::string& a_path, const std::string& b_path, const std::string& eps_str,
               const std::string& preset, int max_size, const std::string& cert_path,
               std::optional<int> jobs) {
  RunReport report("search");
  Rat eps;
  try {
    eps = parse_epsilon(eps_str);
  } catch (const crl::ParseError& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  std::optional<crl::ClassPreset> kind = crl::ClassPreset::by_name(preset);
  if (!kind) {
    std::cout << "input error: unknown preset '" << preset << "'\n";
    return kInputError;
  }
  if (max_size < 1) {
    std::cout << "input error: --max-size must be at least 1\n";
    return kInputError;
  }
  int code = kOk;
  auto sa = load_structure(a_path, code);
  if (!sa) return code;
  auto sb = load_structure(b_path, code);
  if (!sb) return code;
  crl::StructureRef a = crl::share(std::move(*sa));
  crl::StructureRef b = crl::share(std::move(*sb));
  report.input("A", a_path, crl::structure_hash(*a));
  report.input("B", b_path, crl::structure_hash(*b));
  report.field("preset", preset);
  report.rational("epsilon", eps);

  std::vector<crl::StructureRef> candidates;
  std::vector<int> sizes;
  for (int n = 1; n <= max_size; ++n) {
    try {
      candidates.push_back(crl::share(crl::generate_preset(*kind, n)));
      sizes.push_back(n);
    } catch (const std::out_of_range&) {
      break;  // preset family exhausted below max_size
    }
  }
  if (candidates.empty()) {
    std::cout << "input error: preset '" << preset << "' offers no sizes up to "
              << max_size << "\n";
    return kInputError;
  }

  crl::ramsey::SearchOutcome out;
  try {
    out = crl::ramsey::search_witness(a, b, eps, candidates, jobs);
  } catch (const std::invalid_argument& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  if (out.status == crl::ramsey::SearchOutcome::Status::vacuous) {
    report.field("verdict", "DEGENERATE");
    report.field("note", "Emb(A,B) is empty: every candidate works vacuously");
    report.print();
    return kOk;
  }
  for (std::size_t i = 0; i < out.trail.size(); ++i) {
    if (out.trail[i])
      report.field("candidate size " + std::to_string(sizes[i]), crl::rat_report(*out.trail[i]));
    else
      report.field("candidate size " + std::to_string(sizes[i]), "degenerate (no embedding of B)");
  }
  if (out.status == crl::ramsey::SearchOutcome::Status::found) {
    report.field("witness size", std::to_string(sizes[static_cast<std::size_t>(out.index)]));
    report.rational("value", out.result->value);
    if (!cert_path.empty()) {
      try {
        write_file(cert_path, crl::ramsey::serialize_certificate(
                                  crl::ramsey::doc_from_witness(out.result->certificate)));
      } catch (const std::runtime_error& e) {
        std::cout << "input error: " << e.what() << "\n";
        return kInputError;
      }
      report.field("certificate", cert_path);
    }
    report.field("verdict", "FOUND");
    report.print();
    return kOk;
  }
  report.field("verdict", "EXHAUSTED");
  report.print();
  return kExhausted;
}

int cmd_group(const std::string& group_spec, const std::string& f_str, int radius,
              std::optional<int> jobs) {
  std::string spec_text = group_spec;
  if (std::filesystem::exists(group_spec)) {
    try {
      spec_text = read_file(group_spec);
    } catch (const std::runtime_error& e) {
      std::cout << "input error: " << e.what() << "\n";
      return kInputError;
    }
  }
  std::optional<crl::groups::GroupHandle> group;
  try {
    group = crl::groups::parse_group_spec(spec_text);
  } catch (const crl::ParseError& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }

  // F elements: split on ';' when present (free-abelian vectors contain
  // commas), otherwise on ','.
  std::vector<std::string> F;
  {
    char sep = f_str.find(';') != std::string::npos ? ';' : ',';
    std::size_t pos = 0;
    while (pos <= f_str.size()) {
      std::size_t next = f_str.find(sep, pos);
      std::string part = f_str.substr(pos, next == std::string::npos ? next : next - pos);
      if (!part.empty()) F.push_back(part);
      if (next == std::string::npos) break;
      pos = next + 1;
    }
  }
  if (F.empty()) {
    std::cout << "input error: --F lists no elements\n";
    return kInputError;
  }

  try {
    std::cout << "radius,value,decimal\n";
    if (group->is_table()) {
      crl::groups::GroupCriterionInstance inst{*group, F, group->support(0),
                                               crl::groups::GroupMetric::discrete, std::nullopt};
      crl::groups::GroupValue gv = crl::groups::group_value(inst);
      std::cout << "0," << crl::rat_str(gv.value) << "," << crl::rat_decimal(gv.value) << "\n";
    } else {
      auto profile = crl::groups::decay_profile(*group, F, radius, jobs);
      for (const auto& [r, v] : profile)
        std::cout << r << "," << crl::rat_str(v) << "," << crl::rat_decimal(v) << "\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

int cmd_verify(const std::string& cert_path, const std::string& a_path,
               const std::string& b_path, const std::string& c_path) {
  std::string text;
  try {
    text = read_file(cert_path);
  } catch (const std::runtime_error& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  crl::ramsey::CertDoc doc;
  try {
    doc = crl::ramsey::parse_certificate_text(text);
  } catch (const crl::ParseError& e) {
    std::cout << "parse error [format]: " << e.what() << "\n";
    return kInputError;
  }
  // Optional cross-check against the original input files.
  struct Cross {
    const std::string* path;
    const std::string* hash;
    const char* label;
  };
  const std::array<Cross, 3> crosses = {{{&a_path, &doc.hash_a, "A"},
                                         {&b_path, &doc.hash_b, "B"},
                                         {&c_path, &doc.hash_c, "C"}}};
  for (const auto& x : crosses) {
    if (x.path->empty()) continue;
    int code = kOk;
    auto s = load_structure(*x.path, code);
    if (!s) return code;
    if (crl::structure_hash(*s) != *x.hash) {
      std::cout << "verification failed [hash]: structure " << x.label
                << " differs from the certificate\n";
      return kFailure;
    }
  }
  crl::ramsey::VerifyResult res = crl::ramsey::verify_certificate(doc);
  if (!res.ok) {
    std::cout << "verification failed [" << res.failure_class << "]: " << res.detail << "\n";
    return kFailure;
  }
  std::cout << "certificate ok: mode " << doc.mode << ", value " << crl::rat_report(doc.value)
            << "\n";
  return kOk;
}

int cmd_preset(const std::string& family, int size, const std::string& out_path) {
  std::optional<crl::ClassPreset> kind = crl::ClassPreset::by_name(family);
  if (!kind) {
    std::cout << "input error: unknown preset '" << family << "'\n";
    return kInputError;
  }
  crl::MetricStructure s;
  try {
    s = crl::generate_preset(*kind, size);
  } catch (const std::out_of_range& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  std::string text = crl::serialize_structure(s);
  if (out_path.empty()) {
    std::cout << text;
    return kOk;
  }
  try {
    write_file(out_path, text);
  } catch (const std::runtime_error& e) {
    std::cout << "input error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex Ramsey workbench"};
  app.require_subcommand(1);

  std::string v_a, v_b, v_c, v_mode = "uniform", v_eps, v_cert;
  int v_restarts = 0;
  auto* value = app.add_subcommand("value", "compute the value of a triple and decide vs epsilon");
  value->add_option("A", v_a, "structure file for A")->required();
  value->add_option("B", v_b, "structure file for B")->required();
  value->add_option("C", v_c, "structure file for C")->required();
  value->add_option("--mode", v_mode, "uniform or adaptive")->check(CLI::IsMember({"uniform", "adaptive"}));
  value->add_option("--eps", v_eps, "threshold as p/q")->required();
  value->add_option("--cert", v_cert, "write the witness certificate here");
  value->add_option("--restarts", v_restarts, "adaptive search restarts (default 200)");

  std::string s_a, s_b, s_eps, s_preset, s_cert;
  int s_max = 8;
  std::optional<int> s_jobs;
  auto* search = app.add_subcommand("search", "scan preset candidates for a witnessing C");
  search->add_option("A", s_a, "structure file for A")->required();
  search->add_option("B", s_b, "structure file for B")->required();
  search->add_option("--eps", s_eps, "threshold as p/q")->required();
  search->add_option("--preset", s_preset, "candidate family")->required();
  search->add_option("--max-size", s_max, "largest candidate size (default 8)");
  search->add_option("--cert", s_cert, "write the first witness certificate here");
  search->add_option("--jobs", s_jobs, "parallel candidate evaluations (default: CRL_JOBS or cores)");

  std::string g_spec, g_f;
  int g_radius = 4;
  std::optional<int> g_jobs;
  auto* groupc = app.add_subcommand("group", "decay profile of the group criterion value");
  groupc->add_option("--group", g_spec, "group file or inline spec ('free 2', 'abelian 1')")->required();
  groupc->add_option("--F", g_f, "elements, comma separated (';' for vector elements)")->required();
  groupc->add_option("--radius", g_radius, "largest ball radius (default 4)");
  groupc->add_option("--jobs", g_jobs, "parallel radius evaluations");

  std::string val_path;
  auto* validate = app.add_subcommand("validate", "check a structure file");
  validate->add_option("file", val_path, "structure file")->required();

  std::string ver_cert, ver_a, ver_b, ver_c;
  auto* verify = app.add_subcommand("verify", "replay a witness certificate");
  verify->add_option("cert", ver_cert, "certificate file")->required();
  verify->add_option("--A", ver_a, "cross-check structure A against this file");
  verify->add_option("--B", ver_b, "cross-check structure B against this file");
  verify->add_option("--C", ver_c, "cross-check structure C against this file");

  std::string p_family, p_out;
  int p_size = 0;
  auto* preset = app.add_subcommand("preset", "write a preset structure file");
  preset->add_option("family", p_family, "pure-sets, linear-orders, graphs, two-level-ultrametric")
      ->required();
  preset->add_option("size", p_size, "number of points")->required();
  preset->add_option("--out", p_out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (value->parsed()) return cmd_value(v_a, v_b, v_c, v_mode, v_eps, v_cert, v_restarts);
    if (search->parsed()) return cmd_search(s_a, s_b, s_eps, s_preset, s_max, s_cert, s_jobs);
    if (groupc->parsed()) return cmd_group(g_spec, g_f, g_radius, g_jobs);
    if (validate->parsed()) return cmd_validate(val_path);
    if (verify->parsed()) return cmd_verify(ver_cert, ver_a, ver_b, ver_c);
    if (preset->parsed()) return cmd_preset(p_family, p_size, p_out);
  } catch (const std::exception& e) {
    std::cout << "internal error: " << e.what() << "\n";
    return kFailure;
  }
  return kInputError;
}
