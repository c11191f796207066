#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "purets/checkpoint.hpp"
#include "purets/errors.hpp"
#include "purets/io.hpp"
#include "purets/model.hpp"
#include "purets/plot.hpp"
#include "purets/random.hpp"

using namespace purets;

namespace {

std::size_t count_substr(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  const double values[] = {0.1,     1.0 / 3.0, -2.5,  12345.6789,
                           1e-300,  1.7e308,   0.0,   -0.0,
                           6.02e23, 1e-8,      100.0, 0.4728394629};
  for (double v : values) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("format_double spells out non-finite values") {
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("format_double_fixed pads to the requested precision") {
  CHECK(format_double_fixed(1.5, 2) == "1.50");
  CHECK(format_double_fixed(3.14159, 2) == "3.14");
  CHECK(format_double_fixed(2.0, 3) == "2.000");
  CHECK(format_double_fixed(-0.25, 1) == "-0.2");
  CHECK(format_double_fixed(std::numeric_limits<double>::quiet_NaN(), 2) ==
        "nan");
}

TEST_CASE("read_file reports a missing path") {
  CHECK_THROWS_AS(read_file("/nonexistent/really/not_here.txt"), IoError);
}

TEST_CASE("write_file_atomic round-trips binary content") {
  testutil::TempDir dir;
  const auto path = dir / "blob.bin";
  std::string content = "line1\n";
  content.push_back('\0');
  content += "\xff\x01 after nul";
  write_file_atomic(path, content);
  CHECK(read_file(path) == content);
}

TEST_CASE("write_file_atomic creates parent directories") {
  testutil::TempDir dir;
  const auto path = dir.path() / "a" / "b" / "c.txt";
  write_file_atomic(path, "nested");
  CHECK(read_file(path) == "nested");
}

TEST_CASE("write_file_atomic overwrites and leaves no temp residue") {
  testutil::TempDir dir;
  const auto path = dir / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  std::size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("checkpoints round-trip models bit for bit") {
  testutil::TempDir dir;
  RandomSource rng(12);
  for (int rep = 0; rep < 8; ++rep) {
    const LinearStack m = testutil::random_stack(rng);
    const std::map<std::string, std::string> config = {
        {"dataset", "sine"}, {"seed", "7"}, {"lr", "0.001"}};
    const auto path = dir / ("ck" + std::to_string(rep) + ".bin");
    save_checkpoint(path, m, config);

    const Checkpoint ck = load_checkpoint(path);
    CHECK(ck.config == config);
    CHECK(ck.model.input_window == m.input_window);
    CHECK(ck.model.horizon == m.horizon);
    CHECK(ck.model.n_features == m.n_features);
    REQUIRE(ck.model.temporal.size() == m.temporal.size());
    for (std::size_t k = 0; k < m.temporal.size(); ++k) {
      CHECK(ck.model.temporal[k].activation == m.temporal[k].activation);
      CHECK(testutil::exact_equal(ck.model.temporal[k].weight,
                                  m.temporal[k].weight));
      CHECK(testutil::exact_equal(ck.model.temporal[k].bias,
                                  m.temporal[k].bias));
    }
    REQUIRE(ck.model.spatial.has_value() == m.spatial.has_value());
    if (m.spatial) {
      CHECK(testutil::exact_equal(ck.model.spatial->weight,
                                  m.spatial->weight));
      CHECK(testutil::exact_equal(ck.model.spatial->bias, m.spatial->bias));
    }
  }
}

TEST_CASE("corrupt checkpoints are rejected with a parse error") {
  testutil::TempDir dir;
  RandomSource rng(13);
  LinearStack m = make_model(ModelKind::PureTS, 6, 3, 2, 2);
  init_parameters(m, rng);
  const auto good = dir / "good.bin";
  save_checkpoint(good, m);
  const std::string blob = read_file(good);

  SUBCASE("wrong magic") {
    std::string bad = blob;
    bad[0] = 'X';
    const auto path = dir / "magic.bin";
    write_file_atomic(path, bad);
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    CHECK_THROWS_AS(checkpoint_value_count(path), ParseError);
  }
  SUBCASE("file shorter than any header") {
    const auto path = dir / "tiny.bin";
    write_file_atomic(path, "PTS");
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("truncated parameter buffers") {
    const auto path = dir / "trunc.bin";
    write_file_atomic(path, blob.substr(0, blob.size() - 8));
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("trailing bytes after the buffers") {
    const auto path = dir / "trail.bin";
    write_file_atomic(path, blob + std::string(8, '\0'));
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
}

TEST_CASE("line charts are a pure function of their inputs") {
  const std::vector<PlotSeries> series = {
      {"train", {1.0, 0.5, 0.25, 0.125}},
      {"val", {1.2, 0.7, 0.5}},
  };
  PlotOptions opts;
  opts.title = "loss";
  opts.x_label = "epoch";
  opts.y_label = "mse";
  const std::string a = render_line_chart(series, opts);
  const std::string b = render_line_chart(series, opts);
  CHECK(a == b);
  CHECK(count_substr(a, "<polyline ") == 2);
  CHECK(a.find("loss") != std::string::npos);
  CHECK(a.find("epoch") != std::string::npos);
}

TEST_CASE("each sample becomes one polyline vertex") {
  std::vector<PlotSeries> series(1);
  series[0].label = "pred";
  for (int k = 0; k < 720; ++k)
    series[0].y.push_back(std::sin(0.05 * static_cast<double>(k)));
  const std::string svg = render_line_chart(series, {});
  // commas appear only inside polyline point lists, one per vertex
  CHECK(count_substr(svg, ",") == 720);
}

TEST_CASE("charts reject bad input") {
  CHECK_THROWS_AS(render_line_chart({}, {}), ConfigError);
  CHECK_THROWS_AS(render_line_chart({{"empty", {}}}, {}), ConfigError);
  CHECK_THROWS_AS(
      render_line_chart({{"bad", {1.0, std::nan(""), 2.0}}}, {}),
      NumericError);
  PlotOptions tiny;
  tiny.width = 100;
  tiny.height = 100;
  CHECK_THROWS_AS(render_line_chart({{"s", {1.0, 2.0}}}, tiny), ConfigError);
}

TEST_CASE("log scale engages only when every value is positive") {
  PlotOptions opts;
  opts.y_label = "mse";
  opts.log_y = true;
  const std::string logged =
      render_line_chart({{"s", {1.0, 0.1, 0.01}}}, opts);
  CHECK(logged.find("(log scale)") != std::string::npos);
  const std::string fallback =
      render_line_chart({{"s", {1.0, 0.0, 0.01}}}, opts);
  CHECK(fallback.find("(log scale)") == std::string::npos);
}
