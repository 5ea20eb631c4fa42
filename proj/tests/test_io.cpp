#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "hypfill/interp.hpp"
#include "hypfill/io.hpp"

using namespace hypfill;

namespace {

const std::filesystem::path tmp_root = "io_tmp";

std::string write_text(const std::string& name, const std::string& content) {
  std::filesystem::create_directories(tmp_root);
  const auto path = (tmp_root / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("csv ingestion: plain rows give unit weights") {
  auto sp = space_from_csv("0.0,1\n0.5,1\n1.0,1\n");
  CHECK_EQ(sp.size(), 3);
  CHECK_EQ(sp.total_mass(), doctest::Approx(3.0));
  CHECK_EQ(sp.distance(0, 2), doctest::Approx(1.0));
}

TEST_CASE("csv ingestion: header row can name a weight column") {
  auto sp = space_from_csv("x,weight\n0.0,2\n1.0,3\n");
  CHECK_EQ(sp.size(), 2);
  CHECK_EQ(sp.total_mass(), doctest::Approx(5.0));
  CHECK_EQ(sp.distance(0, 1), doctest::Approx(1.0));

  // Comments and blank lines are skipped.
  auto sp2 = space_from_csv("# sampled interval\nx,w\n0.0,1\n\n0.25,1\n0.75,2\n");
  CHECK_EQ(sp2.size(), 3);
  CHECK_EQ(sp2.total_mass(), doctest::Approx(4.0));
}

TEST_CASE("csv ingestion errors carry row numbers") {
  CHECK_THROWS_AS(space_from_csv("x,w\n0.0,1\n0.5,-1\n"), ParseError);
  try {
    space_from_csv("x,w\n0.0,1\n0.5,-1\n");
  } catch (const ParseError& e) {
    CHECK_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }

  CHECK_THROWS_AS(space_from_csv("0.0,1\n0.5\n"), ParseError);
  CHECK_THROWS_AS(space_from_csv("x,w\n0.0,abc\n"), ParseError);
  CHECK_THROWS_AS(space_from_csv(""), ParseError);
}

TEST_CASE("json space: distance matrix with weights") {
  json j;
  j["metric"] = "matrix";
  j["distances"] = {{0.0, 1.0}, {1.0, 0.0}};
  j["weights"] = {2.0, 3.0};
  auto sp = space_from_json(j);
  CHECK_EQ(sp.size(), 2);
  CHECK_EQ(sp.total_mass(), doctest::Approx(5.0));
  CHECK_EQ(sp.distance(0, 1), doctest::Approx(1.0));

  j["weights"] = {2.0, -1.0};
  CHECK_THROWS(space_from_json(j));
}

TEST_CASE("space json round trips for every metric kind") {
  const PointCloudSpace<double> spaces[] = {make_grid1d<double>(16), make_circle<double>(8),
                                            [] {
                                              MatX<double> d(3, 3);
                                              d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
                                              VecX<double> w(3);
                                              w << 1, 2, 3;
                                              return PointCloudSpace<double>::from_distance_matrix(
                                                  d, w);
                                            }()};
  for (const auto& sp : spaces) {
    auto back = space_from_json(space_to_json(sp));
    REQUIRE_EQ(back.size(), sp.size());
    CHECK_EQ(back.total_mass(), doctest::Approx(sp.total_mass()));
    for (Index i = 0; i < sp.size(); ++i)
      for (Index k = i + 1; k < sp.size(); ++k)
        CHECK_EQ(back.distance(i, k), doctest::Approx(sp.distance(i, k)).epsilon(1e-14));
  }
}

TEST_CASE("space argument resolution: generators and files") {
  CHECK_EQ(resolve_space_arg("grid1d:8").size(), 8);
  CHECK_EQ(resolve_space_arg("gridd:3,2").size(), 9);
  CHECK_EQ(resolve_space_arg("circle:16").size(), 16);
  CHECK_EQ(resolve_space_arg("cantor:3").size(), 8);
  CHECK_THROWS_AS(resolve_space_arg("grid1d:1"), std::exception);
  CHECK_THROWS_AS(resolve_space_arg("nosuch_space.json"), ParseError);

  const auto path = write_text("roundtrip_space.json", space_to_json(make_grid1d<double>(12)).dump());
  CHECK_EQ(resolve_space_arg(path).size(), 12);

  const auto csv = write_text("pts.csv", "0.0,1\n1.0,1\n");
  CHECK_EQ(resolve_space_arg(csv).size(), 2);
}

TEST_CASE("filling round trip preserves the graph and detects tampering") {
  auto sp = make_grid1d<double>(32);
  auto f = build_filling(sp, 0, 4);
  auto j = filling_to_json(f);

  CHECK_EQ(j.at("level_min").get<int>(), 0);
  CHECK_EQ(j.at("level_max").get<int>(), 4);
  CHECK_EQ(j.at("levels").size(), 5);

  auto back = filling_from_json(j, sp);
  REQUIRE_EQ(back.vertex_count(), f.vertex_count());
  REQUIRE_EQ(back.edge_count(), f.edge_count());
  for (Index i = 0; i < f.vertex_count(); ++i) {
    CHECK_EQ(back.vertex(static_cast<int>(i)).center, f.vertex(static_cast<int>(i)).center);
    CHECK_EQ(back.vertex(static_cast<int>(i)).measure,
             doctest::Approx(f.vertex(static_cast<int>(i)).measure));
  }

  // A stored measure that disagrees with the space is data corruption.
  auto tampered = j;
  tampered["levels"][0]["vertices"][0]["measure"] =
      tampered["levels"][0]["vertices"][0]["measure"].get<double>() * 1.1;
  CHECK_THROWS_AS(filling_from_json(tampered, sp), ParseError);
}

TEST_CASE("sequence files: kinds and sizes are enforced") {
  VecX<double> v(3);
  v << 1.5, -2.0, 0.25;
  const auto path = write_text("seq.json", sequence_to_json(v, "vertex").dump());

  auto loaded = load_sequence(path, "vertex", 3);
  CHECK_EQ(loaded[0], doctest::Approx(1.5));
  CHECK_EQ(loaded[2], doctest::Approx(0.25));

  CHECK_THROWS_AS(load_sequence(path, "edge", 3), ParseError);
  CHECK_THROWS_AS(load_sequence(path, "vertex", 4), ParseError);
  const auto garbled = write_text("seq_bad.json", "{not json");
  CHECK_THROWS_AS(load_sequence(garbled, "vertex", 3), ParseError);
}

TEST_CASE("norm parameters serialize infinities as strings") {
  auto prm = NormParams<double>::make(0.5, infinity<double>(), 2.0);
  auto j = norm_params_to_json(prm);
  CHECK_EQ(j.at("p").get<std::string>(), "inf");
  auto back = norm_params_from_json(j);
  CHECK_EQ(back.p, infinity<double>());
  CHECK_EQ(back.q, doctest::Approx(2.0));

  CHECK_EQ(parse_extended_real("inf"), infinity<double>());
  CHECK_EQ(parse_extended_real("Infinity"), infinity<double>());
  CHECK_EQ(parse_extended_real("2.5"), doctest::Approx(2.5));
  CHECK_THROWS_AS(parse_extended_real("soup"), ParseError);
}

TEST_CASE("certificate json round trip") {
  auto sp = make_grid1d<double>(32);
  auto f = build_filling(sp, 0, 4);
  auto items = vertex_items(f);
  VecX<double> u = VecX<double>::LinSpaced(items.size(), 0.1, 1.0);
  auto cert = calderon_factorize(items, u, NormParams<double>::make(0.3, 1.0, 1.0),
                                 NormParams<double>::make(0.7, 3.0, 2.0), 0.5);

  auto back = certificate_from_json(certificate_to_json(cert));
  CHECK_EQ(back.theta, doctest::Approx(cert.theta));
  CHECK_EQ(back.bound_ratio, doctest::Approx(cert.bound_ratio).epsilon(1e-14));
  CHECK_EQ(back.norm_u, doctest::Approx(cert.norm_u).epsilon(1e-14));
  CHECK_EQ(back.params.p, doctest::Approx(cert.params.p));
  REQUIRE_EQ(back.u0.size(), cert.u0.size());
  CHECK_LE((back.u0 - cert.u0).cwiseAbs().maxCoeff(), 1e-14);
  CHECK(validate_certificate(back, u));
}

TEST_CASE("structure report serialization") {
  auto sp = make_grid1d<double>(64);
  auto f = build_filling(sp, 0, 5);
  auto j = structure_report_to_json(check_filling(f, sp));
  CHECK(j.at("separation_ok").get<bool>());
  CHECK_EQ(j.at("levels").size(), 6);
  CHECK(j.at("levels")[0].contains("max_overlap"));
}

TEST_CASE("format guessing and file dispatch") {
  CHECK(guess_format("points.csv") == FileFormat::csv);
  CHECK(guess_format("points.CSV") == FileFormat::csv);
  CHECK(guess_format("points.json") == FileFormat::json);
  CHECK(guess_format("points") == FileFormat::json);

  const auto path = write_text("cloud.csv", "0.0,1\n0.5,1\n1.0,1\n");
  CHECK_EQ(load_point_cloud(path, FileFormat::csv).size(), 3);
}
