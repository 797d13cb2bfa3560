#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " " + MENERGY_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json last_line(const std::string& out) {
  const auto end = out.find_last_not_of('\n');
  const auto start = out.rfind('\n', end);
  return nlohmann::json::parse(out.substr(start == std::string::npos ? 0 : start + 1, end + 1));
}

void write(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

const std::string kDir = "/tmp/menergy_cli_test_";

}  // namespace

TEST_CASE("check suites and exit codes") {
  const Run ok = run("check --suite grassmann --seed 7");
  CHECK(ok.code == 0);
  CHECK(last_line(ok.out)["pass"] == true);
  const Run tampered = run("check --suite grassmann --seed 7 --tamper cone_lemma_containment");
  CHECK(tampered.code == 3);
  CHECK(tampered.out.find("\"pass\":false,\"property\":\"cone_lemma_containment\"") != std::string::npos);
  CHECK(run("check --suite nonsense").code == 2);
  CHECK(run("check --suite grassmann", "MENERGY_THREADS=zero").code == 2);
  CHECK(run("check --suite grassmann --seed 3", "MENERGY_THREADS=2").code == 0);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("generate, then measure") {
  const std::string set = kDir + "circle.json";
  const Run g = run("gen --shape circle --N 512 --out " + set);
  REQUIRE(g.code == 0);
  CHECK(last_line(g.out)["N"] == 512);
  const Run e = run("energy --set " + set + " --tau 1");
  CHECK(e.code == 0);
  CHECK(last_line(e.out)["value"].get<double>() < 1e-12);
  const Run ks = run("energy --set " + set + " --kernel ks --center 1,0 --radius 0.5");
  CHECK(ks.code == 0);
  CHECK(last_line(ks.out)["pairs_used"].get<int>() > 0);
  const Run fl = run("flatness --set " + set + " --points 0,5 --radii 0.2,0.1 --delta 0.15");
  CHECK(fl.code == 0);
  CHECK(last_line(fl.out)["verdict"] == true);
  CHECK(run("energy --set " + kDir + "missing.json").code == 4);
  CHECK(run("energy --set " + set + " --tau -2").code == 2);
  CHECK(run("gen --shape dodecahedron").code == 2);
}

TEST_CASE("grassmann angle from frame files") {
  write(kDir + "a.json", "[[1,0,0],[0,1,0]]");
  write(kDir + "b.json", "[[1,0,0],[0,0.8775825618903728,0.479425538604203]]");
  const Run r = run("grassmann angle --a " + kDir + "a.json --b " + kDir + "b.json");
  REQUIRE(r.code == 0);
  const auto j = last_line(r.out);
  CHECK(j["principal_angles"][1].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["angle_metric"].get<double>() == doctest::Approx(std::sin(0.5)).epsilon(1e-12));
  write(kDir + "bad.json", "[[1,0,0],[1,0,0]]");
  CHECK(run("grassmann angle --a " + kDir + "a.json --b " + kDir + "bad.json").code == 4);
}

TEST_CASE("admissibility on a generated patch") {
  const std::string set = kDir + "sheets.json";
  REQUIRE(run("gen --shape graph --fixture paraboloid --amplitude 0.0 --extent 1 --step 0.03125 --out " + set).code == 0);
  write(kDir + "plane.json", "[[1,0,0],[0,1,0]]");
  const Run r = run("admissibility --set " + set + " --at 0.015625,0.015625,0 --plane " + kDir +
                    "plane.json --alpha 0.1 --M 1 --R 0.5 --c 1.0");
  CHECK(r.code == 0);
  CHECK(last_line(r.out)["coverage_pass"] == true);
}

TEST_CASE("lipgraph subcommands") {
  const Run li = run("lipgraph intersect --fixture paraboloid --m 2 --amplitude 0.01 --extent 1 --tilt 0.8");
  CHECK(li.code == 0);
  const auto j = last_line(li.out);
  CHECK(j["j"] == 1);
  CHECK(j["verified"] == true);
  CHECK(run("lipgraph intersect --fixture sin_wave --amplitude 0.5 --tilt 0.8").code == 2);
  const Run so = run("lipgraph sobolev --fixture paraboloid --tau 1 --r 0.5 --steps 0.1");
  CHECK(so.code == 0);
  CHECK(last_line(so.out)["levels"][0]["ratio"].get<double>() > 0.0);
}

TEST_CASE("experiments emit reports and CSV") {
  const std::string csv = kDir + "circle.csv";
  const Run r = run("experiment --name circle_zero --params '{\"N\":512}' --csv " + csv);
  CHECK(r.code == 0);
  const auto j = last_line(r.out);
  CHECK(j["circle_energy"].get<double>() <= 1e-10);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  CHECK(header == "shape,N,energy");
  CHECK(run("experiment --name unknown").code == 2);
  CHECK(run("experiment --name circle_zero --params '{oops'").code == 2);
}
