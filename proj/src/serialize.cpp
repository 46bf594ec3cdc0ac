#include "patternset/serialize.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace patternset {

namespace {

using json = nlohmann::ordered_json;

json rat(const Rational& r) { return rational_to_string(r); }

Rational rat_from(const json& j) {
  if (!j.is_string()) throw ConfigError("expected a rational string");
  return parse_rational(j.get<std::string>());
}

json iv(const RationalInterval& x) { return json::array({rat(x.lo), rat(x.hi)}); }

RationalInterval iv_from(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("expected a two-element interval array");
  }
  return RationalInterval(rat_from(j[0]), rat_from(j[1]));
}

Int int_from(const json& j) {
  if (!j.is_string()) throw ConfigError("expected an integer string");
  Int v;
  if (v.set_str(j.get<std::string>(), 10) != 0) {
    throw ConfigError("cannot parse integer: " + j.get<std::string>());
  }
  return v;
}

json spec_to_json(const PatternSpec& spec) {
  json maps = json::array();
  if (spec.mode == PatternMode::Preimage) {
    for (const ConjugatedMap& cm : spec.poly_maps) {
      maps.push_back({{"P", cm.P.to_string()},
                      {"q", cm.psi.q.to_string()},
                      {"n", cm.psi.n},
                      {"sign", cm.psi.sign},
                      {"M_P", cm.M_P.get_str()}});
    }
  } else {
    for (const AffineMap& f : spec.affine_maps) {
      maps.push_back({{"slope", rat(f.slope)},
                      {"intercept", rat(f.intercept)},
                      {"lambda", f.lambda.to_string()}});
    }
  }
  return {{"mode", spec.mode == PatternMode::Preimage ? "preimage" : "image"},
          {"maps", maps},
          {"owners", spec.owners},
          {"depth", spec.depth},
          {"deltas", json::parse(delta_sequence_to_json(spec.deltas))}};
}

PatternSpec spec_from_json(const json& j) {
  PatternSpec spec;
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "preimage") {
    spec.mode = PatternMode::Preimage;
  } else if (mode == "image") {
    spec.mode = PatternMode::Image;
  } else {
    throw ConfigError("unknown mode: " + mode);
  }
  for (const json& m : j.at("maps")) {
    if (spec.mode == PatternMode::Preimage) {
      ConjugatedMap cm{Polynomial::parse(m.at("P").get<std::string>()),
                       Conjugator{Dyadic::parse(m.at("q").get<std::string>()),
                                  m.at("n").get<long>(),
                                  m.at("sign").get<int>()},
                       int_from(m.at("M_P"))};
      spec.poly_maps.push_back(std::move(cm));
    } else {
      spec.affine_maps.push_back(
          AffineMap{rat_from(m.at("slope")), rat_from(m.at("intercept")),
                    Dyadic::parse(m.at("lambda").get<std::string>())});
    }
  }
  spec.owners = j.at("owners").get<std::vector<long>>();
  spec.depth = j.at("depth").get<long>();
  spec.deltas = delta_sequence_from_json(j.at("deltas").dump());
  return spec;
}

}  // namespace

std::string delta_sequence_to_json(const DeltaSequence& seq) {
  json deltas = json::array();
  for (const Dyadic& d : seq.deltas) deltas.push_back(d.to_string());
  json out = {{"L", seq.L},
              {"N", seq.N},
              {"h", seq.h_label},
              {"enumeration", seq.enumeration_tag},
              {"deltas", deltas}};
  return out.dump(2) + "\n";
}

DeltaSequence delta_sequence_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad sequence JSON: ") + e.what());
  }
  try {
    DeltaSequence seq;
    seq.L = j.at("L").get<long>();
    seq.N = j.at("N").get<long>();
    seq.h_label = j.at("h").get<std::string>();
    seq.enumeration_tag = j.at("enumeration").get<std::string>();
    for (const json& d : j.at("deltas")) {
      seq.deltas.push_back(Dyadic::parse(d.get<std::string>()));
    }
    if (seq.deltas.empty()) throw ConfigError("empty delta list");
    return seq;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad sequence JSON: ") + e.what());
  }
}

std::string certificate_to_json(const WitnessCertificate& cert) {
  json steps = json::array();
  for (const WitnessStep& st : cert.steps) {
    steps.push_back({{"m", st.m},
                     {"owner", st.owner},
                     {"grid_index", st.grid_index.get_str()},
                     {"C", iv(st.C)},
                     {"X", iv(st.X)}});
  }
  json out = {{"spec", spec_to_json(cert.spec)},
              {"steps", steps},
              {"final", iv(cert.final_enclosure)},
              {"witness", rat(cert.witness)},
              {"tolerances",
               {{"tol", rat(cert.tol)}, {"lattice_bits", cert.lattice_bits}}}};
  return out.dump(2) + "\n";
}

WitnessCertificate certificate_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad certificate JSON: ") + e.what());
  }
  try {
    WitnessCertificate cert;
    cert.spec = spec_from_json(j.at("spec"));
    for (const json& s : j.at("steps")) {
      WitnessStep st;
      st.m = s.at("m").get<long>();
      st.owner = s.at("owner").get<long>();
      st.grid_index = int_from(s.at("grid_index"));
      st.C = iv_from(s.at("C"));
      st.X = iv_from(s.at("X"));
      cert.steps.push_back(std::move(st));
    }
    cert.final_enclosure = iv_from(j.at("final"));
    cert.witness = rat_from(j.at("witness"));
    cert.tol = rat_from(j.at("tolerances").at("tol"));
    cert.lattice_bits = j.at("tolerances").at("lattice_bits").get<long>();
    return cert;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad certificate JSON: ") + e.what());
  }
}

std::string cover_to_csv(const CoverCertificate& cover) {
  std::string out = "n,M,bound_exact_num,bound_exact_den,paper_bound\n";
  for (const CoverLevel& lvl : cover.levels) {
    out += std::to_string(lvl.n) + "," + lvl.count.get_str() + ",";
    if (lvl.certified) {
      out += lvl.bound.get_num().get_str() + "," +
             lvl.bound.get_den().get_str() + "," +
             rational_to_string(lvl.paper_bound);
    } else {
      out += ",,uncertified";
    }
    out += "\n";
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open for writing: " + tmp);
    f << content;
    if (!f.good()) throw ConfigError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ConfigError("cannot rename into place: " + path);
  }
}

}  // namespace patternset
