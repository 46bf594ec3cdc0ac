// Command-line surface: scale-sequence construction, witness search,
// covering-measure certification, multivariate reduction, and certificate
// re-verification. Exit codes: 0 success/verified, 2 certification
// failure, 3 configuration or validation failure.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "patternset/serialize.hpp"

using namespace patternset;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// "key = value" lines, '#' comments; reports malformed lines with their
// line number
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  long lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

// flags win over config-file values
void fill_from_config(const CLI::App& cmd,
                      const std::map<std::string, std::string>& conf,
                      const std::map<std::string, std::string*>& slots) {
  for (const auto& [key, slot] : slots) {
    if (cmd.get_option("--" + key)->count() > 0) continue;
    auto it = conf.find(key);
    if (it != conf.end()) *slot = it->second;
  }
}

std::vector<std::string> split_pattern(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, ';')) {
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty()) throw ConfigError("empty pattern");
  return out;
}

long to_long(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + what + ": '" + s + "'");
  }
}

int cmd_deltas(const std::string& h_spec, const std::string& l_s,
               const std::string& n_s, const std::string& depth_s,
               const std::string& out_path) {
  DimensionFunction h = DimensionFunction::parse(h_spec);
  DeltaSequence seq =
      build_delta_sequence(h, to_long(l_s, "L"), to_long(n_s, "N"),
                           to_long(depth_s, "depth"));
  DeltaCheckReport check = check_delta_sequence(seq, h);
  if (!check.ok) {
    std::cerr << "self-check failed: " << check.first_failure << "\n";
    return 2;
  }
  write_file_atomic(out_path, delta_sequence_to_json(seq));
  std::cout << "wrote " << out_path << " (" << seq.deltas.size()
            << " levels, verified)\n";
  return 0;
}

PatternSpec build_spec(const std::vector<std::string>& pattern,
                       const std::string& mode, const DeltaSequence& seq,
                       long depth) {
  PatternSpec spec;
  spec.deltas = seq;
  spec.depth = depth;
  if (mode == "preimage") {
    spec.mode = PatternMode::Preimage;
    for (const std::string& text : pattern) {
      Polynomial P = Polynomial::parse(text);
      spec.poly_maps.push_back(compute_threshold(P, choose_conjugator(P)));
    }
  } else if (mode == "image") {
    spec.mode = PatternMode::Image;
    for (const std::string& text : pattern) {
      Polynomial P = Polynomial::parse(text);
      if (P.degree() != 1) {
        throw ConfigError("image mode needs affine maps: '" + text + "'");
      }
      spec.affine_maps.push_back(conjugate_bilipschitz(
          AffineMap{P.coeffs[1], P.coeffs[0]}, seq.L));
    }
  } else {
    throw ConfigError("mode must be preimage or image");
  }
  for (size_t i = 0; i < pattern.size(); ++i) {
    spec.owners.push_back(static_cast<long>(i) + 1);
  }
  return spec;
}

int cmd_witness(const std::string& deltas_path, const std::string& pattern_s,
                const std::string& mode, const std::string& depth_s,
                const std::string& l_s, const std::string& n_s,
                const std::string& out_path) {
  DeltaSequence seq = delta_sequence_from_json(read_file(deltas_path));
  if (!l_s.empty() && to_long(l_s, "L") != seq.L) {
    throw ConfigError("config L does not match the sequence file");
  }
  if (!n_s.empty() && to_long(n_s, "N") != seq.N) {
    throw ConfigError("config N does not match the sequence file");
  }
  PatternSpec spec =
      build_spec(split_pattern(pattern_s), mode, seq, to_long(depth_s, "depth"));
  WitnessCertificate cert = spec.mode == PatternMode::Preimage
                                ? search_preimage_pattern(spec)
                                : search_image_pattern(spec);
  VerifyReport rep = verify_certificate(cert);
  write_file_atomic(out_path, certificate_to_json(cert));
  std::cout << "steps:";
  for (const WitnessStep& st : cert.steps) std::cout << " m=" << st.m;
  std::cout << "\nwitness = " << rational_to_string(cert.witness)
            << "\nenclosure width = "
            << rational_to_string(cert.final_enclosure.width())
            << "\nverified: " << (rep.ok ? "yes" : "NO (" + rep.reason + ")")
            << "\nwrote " << out_path << "\n";
  return rep.ok ? 0 : 2;
}

int cmd_certify_measure(const std::string& deltas_path,
                        const std::string& h_spec, const std::string& n1_s,
                        const std::string& n2_s, const std::string& levels_s,
                        const std::string& out_path) {
  DeltaSequence seq = delta_sequence_from_json(read_file(deltas_path));
  if (!h_spec.empty() && h_spec != seq.h_label) {
    throw ConfigError("config h does not match the sequence file");
  }
  DimensionFunction h = DimensionFunction::parse(seq.h_label);
  CoverCertificate cover =
      certify_measure_decay(seq, h, to_long(n1_s, "N1"), to_long(n2_s, "N2"),
                            to_long(levels_s, "levels"));
  write_file_atomic(out_path, cover_to_csv(cover));
  long decayed = 0;
  for (const CoverLevel& lvl : cover.levels) {
    if (lvl.decays) ++decayed;
  }
  std::cout << "wrote " << out_path << " (" << cover.levels.size()
            << " levels, " << decayed << " below 1/n)\n";
  return 0;
}

int cmd_reduce(const std::string& in_path, const std::string& polys_s,
               const std::string& out_path) {
  std::vector<MultiPoly> polys;
  if (!in_path.empty()) {
    std::istringstream f(read_file(in_path));
    std::string line;
    while (std::getline(f, line)) {
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      polys.push_back(MultiPoly::parse(t));
    }
  }
  if (!polys_s.empty()) {
    for (const std::string& t : split_pattern(polys_s)) {
      polys.push_back(MultiPoly::parse(t));
    }
  }
  Reduction red = reduce_multivariate(polys);
  std::string pattern;
  for (const Polynomial& P : red.univariate) {
    if (!pattern.empty()) pattern += "; ";
    pattern += P.to_string();
  }
  std::string lambdas;
  for (const Rational& l : red.lambdas) {
    if (!lambdas.empty()) lambdas += ", ";
    lambdas += rational_to_string(l);
  }
  write_file_atomic(out_path, pattern + "\n# lambdas: " + lambdas + "\n");
  std::cout << "lambdas: (" << lambdas << ")\npattern: " << pattern
            << "\nwrote " << out_path << "\n";
  return 0;
}

int cmd_verify(const std::string& cert_path) {
  WitnessCertificate cert = certificate_from_json(read_file(cert_path));
  VerifyReport rep = verify_certificate(cert);
  if (rep.ok) {
    std::cout << "certificate verifies (" << cert.steps.size() << " steps)\n";
    return 0;
  }
  std::cout << "REJECTED at step " << rep.step << ": " << rep.reason << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pattern-universal set construction and certification"};
  // --h is a real option (dimension function), so help is --help only
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  long seed = 0;
  app.add_option("--seed", seed, "seed for randomized property runs");

  // every value is carried as a string so a config file can supply it
  std::string conf_path, h_spec, l_s = "2", n_s = "1", depth_s, out_path;
  std::string deltas_path, pattern_s, mode = "preimage", n1_s = "1",
              n2_s = "1", levels_s, in_path, polys_s, cert_path;
  std::string wl_s, wn_s;  // witness-side cross-check values (optional)

  CLI::App* deltas = app.add_subcommand("deltas", "build a scale sequence");
  deltas->set_help_flag("--help", "print help");
  deltas->add_option("--config", conf_path, "key=value config file");
  deltas->add_option("--h", h_spec, "dimension function spec");
  deltas->add_option("--L", l_s, "bilipschitz constant");
  deltas->add_option("--N", n_s, "ambient dimension");
  deltas->add_option("--depth", depth_s, "number of levels");
  deltas->add_option("--out", out_path, "output JSON path");

  CLI::App* witness = app.add_subcommand("witness", "search a pattern witness");
  witness->add_option("--config", conf_path, "key=value config file");
  witness->add_option("--deltas", deltas_path, "sequence JSON file");
  witness->add_option("--pattern", pattern_s, "semicolon-separated maps");
  witness->add_option("--mode", mode, "preimage|image");
  witness->add_option("--depth", depth_s, "schedule length");
  witness->add_option("--L", wl_s, "cross-check L against the file");
  witness->add_option("--N", wn_s, "cross-check N against the file");
  witness->add_option("--out", out_path, "certificate JSON path");

  CLI::App* certify =
      app.add_subcommand("certify-measure", "covering decay table");
  certify->set_help_flag("--help", "print help");
  certify->add_option("--config", conf_path, "key=value config file");
  certify->add_option("--deltas", deltas_path, "sequence JSON file");
  certify->add_option("--h", h_spec, "cross-check h against the file");
  certify->add_option("--N1", n1_s, "window size");
  certify->add_option("--N2", n2_s, "argument scale");
  certify->add_option("--levels", levels_s, "levels to certify");
  certify->add_option("--out", out_path, "output CSV path");

  CLI::App* reduce =
      app.add_subcommand("reduce", "multivariate-to-univariate reduction");
  reduce->add_option("--config", conf_path, "key=value config file");
  reduce->add_option("--in", in_path, "file with one polynomial per line");
  reduce->add_option("--poly", polys_s, "semicolon-separated polynomials");
  reduce->add_option("--out", out_path, "output pattern file");

  CLI::App* verify = app.add_subcommand("verify", "re-check a certificate");
  verify->add_option("--cert", cert_path, "certificate JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    std::map<std::string, std::string> conf;
    if (!conf_path.empty()) conf = read_config(conf_path);
    if (deltas->parsed()) {
      fill_from_config(*deltas, conf,
                       {{"h", &h_spec},
                        {"L", &l_s},
                        {"N", &n_s},
                        {"depth", &depth_s},
                        {"out", &out_path}});
      if (h_spec.empty() || depth_s.empty() || out_path.empty()) {
        throw ConfigError("deltas needs --h, --depth and --out");
      }
      return cmd_deltas(h_spec, l_s, n_s, depth_s, out_path);
    }
    if (witness->parsed()) {
      fill_from_config(*witness, conf,
                       {{"deltas", &deltas_path},
                        {"pattern", &pattern_s},
                        {"mode", &mode},
                        {"depth", &depth_s},
                        {"L", &wl_s},
                        {"N", &wn_s},
                        {"out", &out_path}});
      if (deltas_path.empty() || pattern_s.empty() || depth_s.empty() ||
          out_path.empty()) {
        throw ConfigError("witness needs --deltas, --pattern, --depth, --out");
      }
      return cmd_witness(deltas_path, pattern_s, mode, depth_s, wl_s, wn_s,
                         out_path);
    }
    if (certify->parsed()) {
      fill_from_config(*certify, conf,
                       {{"deltas", &deltas_path},
                        {"h", &h_spec},
                        {"N1", &n1_s},
                        {"N2", &n2_s},
                        {"levels", &levels_s},
                        {"out", &out_path}});
      if (deltas_path.empty() || levels_s.empty() || out_path.empty()) {
        throw ConfigError("certify-measure needs --deltas, --levels, --out");
      }
      return cmd_certify_measure(deltas_path, h_spec, n1_s, n2_s, levels_s,
                                 out_path);
    }
    if (reduce->parsed()) {
      fill_from_config(*reduce, conf,
                       {{"in", &in_path},
                        {"poly", &polys_s},
                        {"out", &out_path}});
      if ((in_path.empty() && polys_s.empty()) || out_path.empty()) {
        throw ConfigError("reduce needs --in or --poly, and --out");
      }
      return cmd_reduce(in_path, polys_s, out_path);
    }
    if (verify->parsed()) {
      if (cert_path.empty()) throw ConfigError("verify needs --cert");
      return cmd_verify(cert_path);
    }
  } catch (const CertificationError& e) {
    std::cerr << "certification failure: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
