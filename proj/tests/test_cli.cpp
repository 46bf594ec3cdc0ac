#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "patternset/serialize.hpp"

using namespace patternset;
namespace fs = std::filesystem;

namespace {

const char* kCli = PATTERNSET_CLI_PATH;

struct RunResult {
  int code;
  std::string out;
};

fs::path work_dir() {
  fs::path d = fs::temp_directory_path() / "patternset_cli_tests";
  fs::create_directories(d);
  return d;
}

RunResult run(const std::string& args) {
  fs::path log = work_dir() / "last_output.txt";
  std::string cmd =
      std::string(kCli) + " " + args + " > " + log.string() + " 2>&1";
  int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WEXITSTATUS(raw);
  std::ifstream f(log);
  std::ostringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("deltas command") {
  fs::path dir = work_dir();
  fs::path out = dir / "seq8.json";
  RunResult r = run("deltas --h pow:1/2 --L 2 --N 1 --depth 8 --out " +
                    out.string());
  REQUIRE(r.code == 0);
  DeltaSequence seq = delta_sequence_from_json(slurp(out));
  CHECK(seq.deltas.size() == 9);
  CHECK(seq.deltas[0].to_rational() == 1);
  CHECK(seq.L == 2);

  // byte-identical on re-run
  std::string first = slurp(out);
  REQUIRE(run("deltas --h pow:1/2 --L 2 --N 1 --depth 8 --out " +
              out.string())
              .code == 0);
  CHECK(slurp(out) == first);

  // depth 0: a single-entry file
  fs::path out0 = dir / "seq0.json";
  REQUIRE(run("deltas --h pow:1/2 --L 2 --depth 0 --out " + out0.string())
              .code == 0);
  CHECK(delta_sequence_from_json(slurp(out0)).deltas.size() == 1);

  // config parse failure
  CHECK(run("deltas --h gauss --L 2 --depth 2 --out " + out0.string())
            .code == 3);
  CHECK(run("deltas --L 2 --depth 2 --out " + out0.string()).code == 3);
}

TEST_CASE("config file with flag precedence") {
  fs::path dir = work_dir();
  fs::path conf = dir / "run.conf";
  fs::path out = dir / "conf_seq.json";
  {
    std::ofstream f(conf);
    f << "# scale sequence settings\n"
      << "h = pow:1/2\n"
      << "L = 2\n"
      << "depth = 3\n"
      << "out = " << out.string() << "\n";
  }
  REQUIRE(run("deltas --config " + conf.string()).code == 0);
  CHECK(delta_sequence_from_json(slurp(out)).L == 2);

  // the flag wins over the file value
  REQUIRE(run("deltas --config " + conf.string() + " --L 4").code == 0);
  CHECK(delta_sequence_from_json(slurp(out)).L == 4);

  fs::path bad = dir / "bad.conf";
  {
    std::ofstream f(bad);
    f << "depth 3\n";
  }
  RunResult r = run("deltas --config " + bad.string());
  CHECK(r.code == 3);
  CHECK(r.out.find(":1:") != std::string::npos);
}

TEST_CASE("witness command end to end") {
  fs::path dir = work_dir();
  fs::path seq = dir / "seq_w.json";
  REQUIRE(run("deltas --h pow:1/2 --L 4 --N 1 --depth 4 --out " +
              seq.string())
              .code == 0);

  fs::path cert1 = dir / "cert1.json";
  RunResult one = run("witness --deltas " + seq.string() +
                      " --pattern x --depth 1 --out " + cert1.string());
  REQUIRE(one.code == 0);
  WitnessCertificate c1 = certificate_from_json(slurp(cert1));
  CHECK(c1.steps.size() == 1);
  CHECK(verify_certificate(c1).ok);

  fs::path cert3 = dir / "cert3.json";
  RunResult three =
      run("witness --deltas " + seq.string() +
          " --pattern \"x; 2*x+1; x^2\" --depth 4 --out " + cert3.string());
  REQUIRE(three.code == 0);
  WitnessCertificate c3 = certificate_from_json(slurp(cert3));
  CHECK(c3.steps.size() == 4);
  CHECK(verify_certificate(c3).ok);

  // verify subcommand round trip, then a tampered file
  CHECK(run("verify --cert " + cert3.string()).code == 0);
  WitnessCertificate bad = c3;
  bad.final_enclosure.hi += Rational(1, Int(1) << 60);
  fs::path badp = dir / "bad_cert.json";
  write_file_atomic(badp.string(), certificate_to_json(bad));
  RunResult rej = run("verify --cert " + badp.string());
  CHECK(rej.code == 2);
  CHECK(rej.out.find("REJECTED") != std::string::npos);

  // mismatched L between flags and the sequence file: exit 3, no output
  fs::path nope = dir / "nope.json";
  RunResult mism = run("witness --deltas " + seq.string() +
                       " --pattern x --depth 1 --L 8 --out " + nope.string());
  CHECK(mism.code == 3);
  CHECK_FALSE(fs::exists(nope));
}

TEST_CASE("image witness via the cli") {
  fs::path dir = work_dir();
  fs::path seq = dir / "seq_img.json";
  REQUIRE(run("deltas --h pow:1/2 --L 2 --depth 5 --out " + seq.string())
              .code == 0);
  fs::path cert = dir / "cert_img.json";
  RunResult r = run("witness --deltas " + seq.string() +
                    " --mode image --pattern \"x; x - 3/2\" --depth 4 --out " +
                    cert.string());
  REQUIRE(r.code == 0);
  WitnessCertificate c = certificate_from_json(slurp(cert));
  CHECK(c.spec.mode == PatternMode::Image);
  CHECK(verify_certificate(c).ok);

  // non-affine pattern in image mode is a validation error
  CHECK(run("witness --deltas " + seq.string() +
            " --mode image --pattern x^2 --depth 1 --out " + cert.string())
            .code == 3);
}

TEST_CASE("certify-measure command") {
  fs::path dir = work_dir();
  fs::path seq = dir / "seq_m.json";
  REQUIRE(run("deltas --h pow:1/2 --L 2 --depth 8 --out " + seq.string())
              .code == 0);
  fs::path csv = dir / "cover.csv";
  REQUIRE(run("certify-measure --deltas " + seq.string() +
              " --N1 1 --N2 1 --levels 8 --out " + csv.string())
              .code == 0);
  std::string table = slurp(csv);
  CHECK(table.rfind("n,M,bound_exact_num,bound_exact_den,paper_bound\n", 0) ==
        0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 9);

  // empty level range: header only
  REQUIRE(run("certify-measure --deltas " + seq.string() +
              " --levels 0 --out " + csv.string())
              .code == 0);
  std::string empty_table = slurp(csv);
  CHECK(std::count(empty_table.begin(), empty_table.end(), '\n') == 1);

  // uncertified row: hand sequence with delta_1 = 1/8 and N2 = 16
  fs::path hand = dir / "hand.json";
  DeltaSequence hs;
  hs.L = 2;
  hs.N = 1;
  hs.h_label = "pow:1/2";
  hs.deltas = {Dyadic::pow2(0), Dyadic::pow2(-3)};
  write_file_atomic(hand.string(), delta_sequence_to_json(hs));
  REQUIRE(run("certify-measure --deltas " + hand.string() +
              " --N2 16 --levels 1 --out " + csv.string())
              .code == 0);
  CHECK(slurp(csv).find("uncertified") != std::string::npos);

  // mismatched h label
  CHECK(run("certify-measure --deltas " + seq.string() +
            " --h loginv --levels 1 --out " + csv.string())
            .code == 3);
}

TEST_CASE("reduce command") {
  fs::path dir = work_dir();
  fs::path out = dir / "reduced.txt";
  RunResult r = run("reduce --poly \"x1*x2; x1 - x2\" --out " + out.string());
  REQUIRE(r.code == 0);
  std::string content = slurp(out);
  CHECK(content.rfind("2*x^2; -x\n", 0) == 0);
  CHECK(r.out.find("lambdas: (2)") != std::string::npos);

  // the emitted pattern feeds straight into the witness command
  fs::path seq = dir / "seq_r.json";
  REQUIRE(run("deltas --h pow:1/2 --L 4 --depth 3 --out " + seq.string())
              .code == 0);
  std::string pattern = content.substr(0, content.find('\n'));
  // -x has a negative branch; use the first (positive-leading) entry
  std::string first = pattern.substr(0, pattern.find(';'));
  fs::path cert = dir / "cert_r.json";
  CHECK(run("witness --deltas " + seq.string() + " --pattern \"" + first +
            "\" --depth 1 --out " + cert.string())
            .code == 0);

  // input file form
  fs::path in = dir / "multis.txt";
  {
    std::ofstream f(in);
    f << "# batch\nx1^2*x2 - x1*x2^2\n";
  }
  REQUIRE(run("reduce --in " + in.string() + " --out " + out.string())
              .code == 0);
  CHECK(slurp(out).rfind("-2*x^3\n", 0) == 0);

  CHECK(run("reduce --poly \"3\" --out " + out.string()).code == 3);
}

TEST_CASE("usage errors") {
  CHECK(run("").code == 3);
  CHECK(run("frobnicate").code == 3);
  CHECK(run("verify").code == 3);
  CHECK(run("verify --cert /nonexistent/cert.json").code == 3);
}
