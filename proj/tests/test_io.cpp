// Persistence and export: PF1 round trips, VTK header conformance, CSV
// slices, RFC-4180 quoting, energy selectors, and config round trips.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "jetforge/calculus.hpp"
#include "jetforge/io.hpp"

using namespace jetforge;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Field wavy_field(const Grid3& g, Rank r) {
  return sample_field(g, r, [](Real x, Real y, Real z, int c) {
    return std::sin(x + 0.3 * c) + 0.5 * std::cos(2 * y - z) + 0.1 * c;
  });
}

}  // namespace

TEST_CASE("pf1 write-read round trip is bit-exact") {
  Grid3 g{12};
  for (Rank r : {Rank::scalar, Rank::vector3, Rank::symtensor3}) {
    Field f = wavy_field(g, r);
    const std::string path = tmp_path("jf_roundtrip.pf1");
    write_pf1(path, f);
    Field back = read_pf1(path);
    REQUIRE(back.grid == g);
    REQUIRE(back.rank == f.rank);
    bool exact = true;
    for (int c = 0; c < f.comps(); ++c)
      for (std::size_t m = 0; m < g.n3(); ++m)
        exact = exact && back.at(c, m) == f.at(c, m);
    CHECK(exact);
    std::remove(path.c_str());
  }
}

TEST_CASE("pf1 zero fields materialize on write") {
  Grid3 g{8};
  const std::string path = tmp_path("jf_zero.pf1");
  write_pf1(path, Field::zero(g, Rank::vector3));
  Field back = read_pf1(path);
  CHECK(linf_norm(back) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("pf1 read rejects a bad magic") {
  const std::string path = tmp_path("jf_bad.pf1");
  write_text_file(path, "definitely not a field dump");
  CHECK_THROWS_WITH_AS(read_pf1(path), doctest::Contains("bad magic"),
                       JfError);
  std::remove(path.c_str());
}

TEST_CASE("vtk legacy export populates the structured-points header") {
  Grid3 g{8};
  Field f = wavy_field(g, Rank::vector3);
  const std::string path = tmp_path("jf_field.vtk");
  write_vtk_legacy(path, f, "velocity");
  std::string body = read_text_file(path);
  CHECK(body.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(body.find("ASCII\n") != std::string::npos);
  CHECK(body.find("DATASET STRUCTURED_POINTS\n") != std::string::npos);
  CHECK(body.find("DIMENSIONS 8 8 8\n") != std::string::npos);
  CHECK(body.find("ORIGIN 0 0 0\n") != std::string::npos);
  CHECK(body.find("SPACING ") != std::string::npos);
  CHECK(body.find("POINT_DATA 512\n") != std::string::npos);
  CHECK(body.find("VECTORS velocity double\n") != std::string::npos);
  std::remove(path.c_str());

  Field s = wavy_field(g, Rank::scalar);
  write_vtk_legacy(path, s, "pressure");
  body = read_text_file(path);
  CHECK(body.find("SCALARS pressure double 1\n") != std::string::npos);
  CHECK(body.find("LOOKUP_TABLE default\n") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("csv slice of sin x1 reproduces the sampled sine in its first row") {
  Grid3 g{16};
  Field f = sample_field(
      g, Rank::scalar, [](Real x, Real, Real, int) { return std::sin(x); });
  const std::string path = tmp_path("jf_slice.csv");
  write_csv_slice(path, f, 0);
  std::string body = read_text_file(path);
  std::string first = body.substr(0, body.find('\n'));
  std::string expect;
  for (int i = 0; i < g.n; ++i)
    expect += fmt_real17(std::sin(g.coord(i))) + (i + 1 < g.n ? "," : "");
  CHECK(first == expect);
  // one row per y per component
  CHECK(std::count(body.begin(), body.end(), '\n') == g.n);
  std::remove(path.c_str());
}

TEST_CASE("csv quoting follows RFC 4180") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_quote("line\nbreak") == "\"line\nbreak\"");
  CHECK(fmt_real17(0.1) == "0.10000000000000001");
}

TEST_CASE("energy selectors sample the documented profiles") {
  EnergySpec cosk{"one_minus_cos_k", 2.0, 3.0, ""};
  auto e = energy_function(cosk);
  CHECK(e(0.0) == doctest::Approx(0.0));
  CHECK(e(kPi / 2) == doctest::Approx(3.0 * (1.0 - std::cos(kPi))));

  EnergySpec flat{"constant", 0.0, 1.5, ""};
  CHECK(energy_function(flat)(7.7) == 1.5);

  const std::string path = tmp_path("jf_energy.csv");
  write_text_file(path, "0,1\n1,3\n2,2\n");
  EnergySpec tab{"tabulated", 0.0, 0.0, path};
  auto et = energy_function(tab);
  CHECK(et(0.5) == doctest::Approx(2.0));
  CHECK(et(1.5) == doctest::Approx(2.5));
  CHECK(et(-1.0) == doctest::Approx(1.0));  // clamped ends
  CHECK(et(9.0) == doctest::Approx(2.0));
  std::remove(path.c_str());

  auto samples = sample_energy(cosk, 0.0, kTwoPi, 5);
  REQUIRE(samples.size() == 5);
  CHECK(samples[0] == doctest::Approx(0.0));
  CHECK(samples[2] == doctest::Approx(3.0 * (1.0 - std::cos(2.0 * kPi))));

  EnergySpec bad{"mystery", 0, 0, ""};
  CHECK_THROWS_AS(energy_function(bad), JfError);
}

TEST_CASE("run config round trips through its text form") {
  RunConfig c;
  c.ledger.a = 2.0;
  c.ledger.b = 7351;
  c.ledger.beta = 1e-9;
  c.ledger.q = 2.0005;
  c.ledger.A = 5.0;
  c.ledger.eps = 0.04;
  c.ledger.nu = 1e-3;
  c.ledger.p_aux = 1.0005;
  c.ledger.T = kTwoPi;
  c.ledger.e_max = 2.0;
  c.jets = JetParams{4.0, 0.25, 0.5, 4.0, 5, 2.5};
  c.profile_shape = "gaussian_truncated";
  c.family = 1;
  c.grid_n = 48;
  c.n_t = 17;
  c.T = kPi;
  c.energy = EnergySpec{"one_minus_cos_k", 3.0, 0.75, ""};
  c.output.directory = "out";
  c.output.formats = {"pf1", "csv_slice"};
  c.seed = 99;

  std::string text = run_config_to_text(c);
  RunConfig back = run_config_from_text(text);
  CHECK(run_config_to_text(back) == text);
  CHECK(back.jets.n_lambda == 5);
  CHECK(back.family == 1);
  CHECK(back.grid_n == 48);
  CHECK(back.energy.k == 3.0);
  CHECK(back.output.formats.size() == 2);
  CHECK(back.seed == 99);

  // rational literals and comments parse
  RunConfig r = run_config_from_text(
      "[jets]\nsigma = 1/8  # concentration\n[grid]\nn = 16\n");
  CHECK(r.jets.sigma == doctest::Approx(0.125));
  CHECK(r.grid_n == 16);

  CHECK_THROWS_AS(run_config_from_text("[grid]\nbogus = 1\n"), JfError);
  CHECK_THROWS_AS(run_config_from_text("orphan = 1\n"), JfError);
}
