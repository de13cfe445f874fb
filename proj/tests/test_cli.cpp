#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lor/cli/csv.hpp"
#include "lor/cli/experiments.hpp"
#include "lor/cli/plot.hpp"
#include "lor/error.hpp"

using namespace lor;
using namespace lor::cli;

namespace {

CsvTable parse(const std::string& s, bool header = true) {
  std::istringstream in(s);
  return read_csv(in, header);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no lor::Error thrown");
  return ErrorKind::InvalidArgument;
}

std::filesystem::path scratch(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("lor_cli_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("csv parsing") {
  const CsvTable t = parse("# experiment=scales\n# M=4\na,b,c\n1,\"x,y\",3\n4,\"say \"\"hi\"\"\",\"two\nlines\"\n");
  CHECK(t.meta_value("experiment") == "scales");
  CHECK(t.meta_value("M") == "4");
  CHECK_FALSE(t.meta_value("missing"));
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[1][1] == "say \"hi\"");
  CHECK(t.rows[1][2] == "two\nlines");
  CHECK(t.number(0, "a") == 1.0);
  CHECK(t.column("c") == 2);
  CHECK(t.column("d") == -1);
  CHECK(t.numbers("a") == std::vector<double>{1.0, 4.0});
}

TEST_CASE("csv handles CRLF and headerless tables") {
  const CsvTable t = parse("1,2\r\n3,4\r\n", false);
  CHECK(t.header.empty());
  REQUIRE(t.rows.size() == 2);
  CHECK(t.number(1, 1) == 4.0);
}

TEST_CASE("malformed csv is rejected") {
  CHECK(kind_of([] { parse("a,b\n1,2,3\n"); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { parse("a,b\n\"open,2\n"); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { parse("a,b\n1\"x,2\n"); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { parse("a,b\n1,zz\n").number(0, "b"); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { parse("a,b\n1,2\n").number(0, "c"); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { read_csv_file("/nonexistent/x.csv"); }) == ErrorKind::Io);
}

TEST_CASE("csv write then read round trips") {
  CsvTable t;
  t.set_meta("experiment", "asymmetry");
  t.set_meta("experiment", "scales");  // replaces
  t.header = {"name", "value"};
  t.rows = {{"plain", format_number(0.1)}, {"with,comma", format_number(1.0 / 3.0)},
            {"quote\"d", format_number(std::numeric_limits<double>::infinity())}};
  std::ostringstream out;
  write_csv(out, t);
  const CsvTable back = parse(out.str());
  CHECK(back.meta.size() == 1);
  CHECK(back.meta_value("experiment") == "scales");
  CHECK(back.rows == t.rows);
  CHECK(back.number(1, "value") == 1.0 / 3.0);
  CHECK(std::isinf(back.number(2, "value")));
  CHECK(format_number(2.5) == "2.5");
}

TEST_CASE("plots are deterministic svg") {
  LinePlot p{"t", "x", "y", {{"a", {0, 1, 2}, {1, 3, 2}}, {"b", {0, 2}, {0, 1}}}};
  const std::string s = render_line_plot(p);
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s == render_line_plot(p));
  CHECK(s.find("polyline") != std::string::npos);
  Heatmap h{"h", 2, 3, {0, 1, 2, 3, 4, 5}, false};
  const std::string hs = render_heatmap(h);
  CHECK(hs.find("<rect") != std::string::npos);
  h.values.pop_back();
  CHECK_THROWS_AS(render_heatmap(h), Error);
}

TEST_CASE("emit_plots dispatches on the csv kind") {
  const auto dir = scratch("plots");
  {
    std::ofstream f(dir / "hist.csv");
    f << "# estimator=pw\n# M=2\n1,2\n3,4\n";
  }
  const auto out = emit_plots(dir / "hist.csv", dir);
  REQUIRE(out.size() == 1);
  CHECK(out[0].extension() == ".svg");
  CHECK(slurp(out[0]) == render_heatmap(heatmap_from_csv(read_csv_file(dir / "hist.csv", false), "hist")));
  {
    std::ofstream f(dir / "bad.csv");
    f << "a,b\n1,2\n";
  }
  CHECK(kind_of([&] { emit_plots(dir / "bad.csv", dir); }) == ErrorKind::MalformedCsv);
  std::filesystem::remove_all(dir);
}

TEST_CASE("flop model arithmetic") {
  const double ratio = FlopModel::pw_nmi(1e6, 256) / FlopModel::ssd(1e6);
  CHECK(ratio == (1331e6 + 9.0 * 65536 + 6.0 * 256) / 1134e6);
  CHECK(ratio == doctest::Approx(1.174).epsilon(1e-3));
  CHECK(MemoryModel::gpv_bytes(1e6) == 192.0 * 1e6 * 8);
  CHECK(MemoryModel::pw_bytes(1e6) == 8.0 * 1e6 * 8);
}

TEST_CASE("experiment config json") {
  for (const char* id : {"asymmetry", "scales", "jointreport", "bench"}) {
    const ExperimentConfig c = default_config(id);
    CHECK_NOTHROW(c.validate());
    const ExperimentConfig back = experiment_config_from_json(to_json(c));
    CHECK(back.id == c.id);
    CHECK(back.sigmas == c.sigmas);
    CHECK(back.alphas == c.alphas);
    CHECK(back.pair.dims == c.pair.dims);
    CHECK(back.bins == c.bins);
  }
  const auto j = nlohmann::json::parse(R"({"experiment":"scales","bins":32,"alphas":[1,"inf"]})");
  const ExperimentConfig c = experiment_config_from_json(j);
  CHECK(c.bins == 32);
  CHECK(std::isinf(c.alphas[1]));
  CHECK(c.betas == default_config("scales").betas);
  CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"experiment", "nope"}}), Error);
  CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"experiment", "scales"}, {"sigmas", {-1}}}),
                  Error);
}

TEST_CASE("stamped csv carries the full config") {
  const ExperimentConfig c = default_config("asymmetry");
  CsvTable t;
  stamp(t, c);
  CHECK(t.meta_value("experiment") == "asymmetry");
  const auto cfg = nlohmann::json::parse(*t.meta_value("config"));
  CHECK(experiment_config_from_json(cfg).pair.count == c.pair.count);
}

TEST_CASE("peak refinement and line fits") {
  std::vector<double> x, y;
  for (int i = -15; i <= 15; ++i) {
    x.push_back(0.1 * i);
    y.push_back(-(0.1 * i - 0.237) * (0.1 * i - 0.237));
  }
  CHECK(refine_peak(x, y) == doctest::Approx(0.237).epsilon(1e-9));
  const LinearFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  const SweepSpec s{0.3, 0.1, 0};
  CHECK(s.offsets().size() == 7);
}

TEST_CASE("synthetic pairs") {
  PairSpec p;
  p.dims = {24, 20, 1};
  p.smoothing = 3.0;
  for (PairKind k : {PairKind::Remap, PairKind::Gradient, PairKind::Blobs, PairKind::Ramps}) {
    p.kind = k;
    const ImagePair ab = make_pair(p, 3);
    CHECK(ab.a.extent() == Extent::make2(24, 20));
    CHECK(ab.b.extent() == ab.a.extent());
    CHECK(pair_kind_from_string(to_string(k)) == k);
  }
  p.kind = PairKind::Remap;
  const ImagePair r = make_pair(p, 3);
  for (std::size_t i = 0; i < r.a.size(); i += 37) CHECK(r.b[i] == doctest::Approx(r.a[i] * r.a[i]));

  // Ramps: equal gradient magnitude along (1,0) and the diagonal.
  p.kind = PairKind::Ramps;
  const ImagePair q = make_pair(p, 3);
  const Extent& e = q.a.extent();
  const double ga = q.a[e.index(1, 0, 0)] - q.a[e.index(0, 0, 0)];
  const double gbx = q.b[e.index(1, 0, 0)] - q.b[e.index(0, 0, 0)];
  const double gby = q.b[e.index(0, 1, 0)] - q.b[e.index(0, 0, 0)];
  CHECK(q.a[e.index(0, 5, 0)] == q.a[e.index(0, 0, 0)]);
  CHECK(gbx == doctest::Approx(gby));
  CHECK(std::hypot(gbx, gby) == doctest::Approx(ga));
}

TEST_CASE("pw sweep is symmetric in the argument order") {
  ExperimentConfig c = default_config("asymmetry");
  c.pair.dims = {32, 32, 1};
  c.pair.smoothing = 4.0;
  c.margin = 4;
  c.sweep = {0.4, 0.1, 0};
  const ImagePair p = make_pair(c.pair, 1);
  const auto a = smoothed_coefficients(p.a, 1.0), b = smoothed_coefficients(p.b, 1.0);
  const EstimatorConfig ec = c.estimator_config(Estimator::PW, 1.0, 1.0 / 64, 1.0);
  const auto fwd = sweep_scores(a, b, ec, c.measure, c.sweep, false);
  const auto swp = sweep_scores(a, b, ec, c.measure, c.sweep, true);
  // At zero offset both orders see the same node pairs.
  CHECK(fwd[4] == doctest::Approx(swp[4]).epsilon(1e-12));
  CHECK(std::abs(refine_peak(c.sweep.offsets(), fwd) - refine_peak(c.sweep.offsets(), swp)) < c.sweep.step);
}

}  // TEST_SUITE
