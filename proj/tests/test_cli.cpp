#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "pml/estimator.hpp"
#include "pml/homodyne.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using pml::cli::dispatch;
using pml::cli::parse_int_range;
using pml::cli::parse_real_grid;
using pml::cli::UsageError;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_int_range", "[cli]") {
  CHECK(parse_int_range("3") == std::pair{3, 3});
  CHECK(parse_int_range("0:10") == std::pair{0, 10});
  CHECK(parse_int_range("-2:2") == std::pair{-2, 2});
  CHECK_THROWS_AS(parse_int_range("4:1"), UsageError);
  CHECK_THROWS_AS(parse_int_range("a:b"), UsageError);
  CHECK_THROWS_AS(parse_int_range("1.5"), UsageError);
}

TEST_CASE("parse_real_grid", "[cli]") {
  CHECK(parse_real_grid("-1") == std::vector<double>{-1.0});
  const auto g = parse_real_grid("-0.4:-0.2:0.1");
  REQUIRE(g.size() == 3);
  CHECK(g[0] == -0.4);
  CHECK(g[1] == -0.3);
  CHECK(g[2] == -0.2);
  const auto u = parse_real_grid("0:6:0.05");
  REQUIRE(u.size() == 121);
  CHECK(u[7] == 0.35);
  CHECK(u.back() == 6.0);
  const auto z = parse_real_grid("-0.2:0.2:0.1");
  CHECK(z[2] == 0.0);
  CHECK_FALSE(std::signbit(z[2]));
  CHECK_THROWS_AS(parse_real_grid("1:0:0.1"), UsageError);
  CHECK_THROWS_AS(parse_real_grid("0:1:0"), UsageError);
  CHECK_THROWS_AS(parse_real_grid("0:1"), UsageError);
  CHECK_THROWS_AS(parse_real_grid("x"), UsageError);
}

TEST_CASE("simulate, estimate and reconstruct chain", "[cli]") {
  const Run sim = run({"simulate", "--state", "sv", "--zeta", "1.317", "--eta", "0.8",
                       "--phases", "24", "--samples", "400", "--seed", "7", "-o",
                       "cli_sv.csv", "--threads", "2"});
  REQUIRE(sim.code == 0);
  const auto ds = pml::homodyne::read_dataset(std::filesystem::path("cli_sv.csv"));
  CHECK(ds.plan.n_phases == 24);
  CHECK(ds.plan.samples_per_phase == 400);
  CHECK(ds.plan.seed == 7);
  CHECK(slurp("cli_sv.csv").find("# command=pml simulate --state sv") != std::string::npos);

  const Run est = run({"estimate", "-i", "cli_sv.csv", "--l", "0:6", "-o", "cli_m.json"});
  REQUIRE(est.code == 0);
  std::ifstream js("cli_m.json");
  const auto doc = pml::estimator::read_moments_json(js);
  REQUIRE(doc.moments.size() == 7);
  CHECK(doc.seed == std::optional<std::uint64_t>(7));
  CHECK(doc.command == "pml estimate -i cli_sv.csv --l 0:6 -o cli_m.json");
  const auto direct = pml::estimator::estimate_moment(ds, 2, -1.0);
  CHECK(doc.moments[2].value == direct.value);

  const Run rec = run({"reconstruct", "-i", "cli_m.json", "--grid", "64"});
  REQUIRE(rec.code == 0);
  CHECK_THAT(rec.out, ContainsSubstring("# seed=7\n"));
  CHECK_THAT(rec.out, ContainsSubstring("# source_command=pml estimate"));
  CHECK_THAT(rec.out, ContainsSubstring("# min_p="));
  CHECK_THAT(rec.out, ContainsSubstring("# L=6\ntheta,p,perr\n"));
  CHECK(std::count(rec.out.begin(), rec.out.end(), '\n') == 6 + 1 + 64);

  SECTION("loss bound violation is a usage failure") {
    const Run bad = run({"estimate", "-i", "cli_sv.csv", "--s", "-0.2"});
    CHECK(bad.code == 2);
    CHECK_THAT(bad.err, ContainsSubstring("s < -0.25"));
    CHECK(bad.out.empty());
    const Run scan = run({"estimate", "-i", "cli_sv.csv", "--s", "-0.4:-0.2:0.1"});
    CHECK(scan.code == 2);
  }

  SECTION("several s values need a selection") {
    REQUIRE(run({"estimate", "-i", "cli_sv.csv", "--l", "0:3", "--s", "-2:-1:0.5", "-o",
                 "cli_scan.json"})
                .code == 0);
    const Run ambiguous = run({"reconstruct", "-i", "cli_scan.json"});
    CHECK(ambiguous.code == 2);
    CHECK_THAT(ambiguous.err, ContainsSubstring("select one with --s"));
    const Run chosen = run({"reconstruct", "-i", "cli_scan.json", "--s", "-1.5", "--grid", "8"});
    CHECK(chosen.code == 0);
    CHECK_THAT(chosen.out, ContainsSubstring("# s=-1.5\n# L=3\n"));
    CHECK(run({"reconstruct", "-i", "cli_scan.json", "--s", "-3"}).code == 2);
    // l = 0 is implied when the file starts at l = 1
    REQUIRE(run({"estimate", "-i", "cli_sv.csv", "--l", "1:4", "-o", "cli_l1.json"}).code == 0);
    const Run implied = run({"reconstruct", "-i", "cli_l1.json", "--grid", "8"});
    CHECK(implied.code == 0);
    CHECK_THAT(implied.out, ContainsSubstring("# L=4\n"));
  }

  SECTION("negative orders are conjugates") {
    const Run neg = run({"estimate", "-i", "cli_sv.csv", "--l", "-1:1"});
    REQUIRE(neg.code == 0);
    std::istringstream in(neg.out);
    const auto m = pml::estimator::read_moments_json(in).moments;
    REQUIRE(m.size() == 3);
    CHECK(m[0].l == -1);
    CHECK(m[0].value == std::conj(m[2].value));
  }
}

TEST_CASE("kernels table", "[cli]") {
  const Run k = run({"kernels", "--l", "1:2", "--u", "0:1:0.5"});
  REQUIRE(k.code == 0);
  CHECK(k.out.starts_with("# command=pml kernels --l 1:2 --u 0:1:0.5\n# seed=none\n"
                          "u,F_1,F_2,K_1,K_2\n0,0,0,0,0\n0.5,"));
  CHECK(std::count(k.out.begin(), k.out.end(), '\n') == 6);
  CHECK(run({"kernels", "--l", "0:2"}).code == 2);
}

TEST_CASE("oracle output", "[cli]") {
  const Run m = run({"oracle", "--state", "coherent", "--xi", "2", "--l", "1:2"});
  REQUIRE(m.code == 0);
  CHECK_THAT(m.out, ContainsSubstring("s,l,re,im\n-1,1,"));
  const Run c = run({"oracle", "--state", "vacuum", "--curve", "4", "--s", "-1"});
  REQUIRE(c.code == 0);
  CHECK_THAT(c.out, ContainsSubstring("s,theta,p\n-1,0,0.15915494309189"));
  CHECK(run({"oracle", "--state", "vacuum", "--s", "1"}).code == 2);
  const Run no_curve = run({"oracle", "--state", "coherent", "--xi", "1", "--curve", "8"});
  CHECK(no_curve.code == 2);
  CHECK(no_curve.out.empty());
}

TEST_CASE("state flag validation", "[cli]") {
  const Run wrong = run({"oracle", "--state", "coherent", "--zeta", "1"});
  CHECK(wrong.code == 2);
  CHECK_THAT(wrong.err, ContainsSubstring("--zeta does not apply to --state coherent"));
  const Run missing = run({"oracle", "--state", "fock"});
  CHECK(missing.code == 2);
  CHECK_THAT(missing.err, ContainsSubstring("requires --n"));
  CHECK(run({"oracle", "--state", "squeezed"}).code == 2);
  CHECK(run({"simulate", "--state", "vacuum", "--eta", "1.5"}).code == 2);
  CHECK(run({"simulate", "--state", "vacuum", "--phases", "0"}).code == 2);
}

TEST_CASE("exit codes", "[cli]") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"estimate"}).code == 2);
  const Run absent = run({"estimate", "-i", "does_not_exist.csv"});
  CHECK(absent.code == 1);
  CHECK_THAT(absent.err, ContainsSubstring("cannot open"));
  {
    std::ofstream bad("cli_bad.csv");
    bad << "# pml-dataset v1\n# state=x\n# eta=2\n# phases=1\n# samples_per_phase=1\n# seed=0\n"
        << "phase_index,theta,x\n0,0,0.5\n";
  }
  const Run parse = run({"estimate", "-i", "cli_bad.csv"});
  CHECK(parse.code == 1);
  CHECK_THAT(parse.err, ContainsSubstring("line 3: eta out of range"));
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK_THAT(help.out, ContainsSubstring("reproduce-figures"));
}
