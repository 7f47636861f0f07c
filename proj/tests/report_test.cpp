#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "debias/report.hpp"

using namespace debias;

namespace {

std::vector<ExperimentSummary> sample_summaries() {
  ExperimentConfig cfg;
  cfg.problem = ProblemId::P1;
  cfg.params = {{"d", 3}};
  cfg.trials = 15;
  cfg.seed = 21;
  return run_sweep(cfg, "sigma", {0.5, 1, 2});
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Csv, ExactColumnsAndRoundTrip) {
  const auto summaries = sample_summaries();
  std::ostringstream os;
  write_csv(os, summaries, {"config problem=P1", "generated 2026-01-01"});
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("# config problem=P1\n", 0), 0u);
  EXPECT_NE(text.find("\nproblem,method,axis,axis_value,n,K,R,seed,rmse_r,bias_r\n"), std::string::npos);
  std::istringstream is(text);
  const auto rows = read_csv(is);
  const auto want = result_rows(summaries);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows, want);
}

TEST(Csv, UndefinedRatiosRoundTrip) {
  ExperimentSummary s;
  s.problem = "P1";
  s.methods.push_back({"shift", 1.0, 1.0, std::nan(""), std::nan("")});
  std::ostringstream os;
  write_csv(os, {s});
  std::istringstream is(os.str());
  const auto rows = read_csv(is);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(std::isnan(rows[0].rmse_r));
  EXPECT_FALSE(rows[0].axis_value.has_value());
}

TEST(Csv, MalformedInputIsParseError) {
  std::istringstream bad("problem,method,axis,axis_value,n,K,R,seed,rmse_r,bias_r\nP1,shift,none,,10,10,5,0,abc,1\n");
  try {
    read_csv(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
  std::istringstream noheader("P1,shift\n");
  EXPECT_THROW(read_csv(noheader), Error);
}

TEST(Emit, EmptyAndUnwritable) {
  EXPECT_THROW(emit_results({}, ResultFormat::csv, "/tmp/x.csv"), Error);
  EXPECT_THROW(emit_plot({}, "/tmp/x.svg"), Error);
  try {
    emit_results(sample_summaries(), ResultFormat::csv, "/nonexistent-dir/out.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Emit, JsonCarriesRawSums) {
  const auto summaries = sample_summaries();
  const auto j = to_json(summaries, {"h"});
  ASSERT_EQ(j["results"].size(), 3u);
  const auto& r0 = j["results"][0];
  EXPECT_EQ(r0["axis"], "sigma");
  EXPECT_EQ(r0["methods"].size(), 3u);
  EXPECT_EQ(r0["naive_sum_sq"].get<double>(), summaries[0].naive_sum_sq);
  EXPECT_EQ(r0["params"]["sigma"].get<double>(), 0.5);
  // full-precision round trip through text
  const auto back = nlohmann::json::parse(j.dump());
  EXPECT_EQ(back["results"][1]["methods"][2]["rmse_r"].get<double>(), summaries[1].methods[2].rmse_r);
}

TEST(Svg, PolylinesPerPanelAndMetadata) {
  auto summaries = sample_summaries();
  const std::vector<ExperimentSummary> one{summaries.front()};
  const std::string svg = render_svg(one);
  EXPECT_EQ(count(svg, "<polyline"), 2 * one.front().methods.size());
  EXPECT_EQ(count(svg, "class=\"panel\""), 2u);
  EXPECT_NE(svg.find("<metadata"), std::string::npos);
  EXPECT_NE(svg.find(kCsvColumns), std::string::npos);
  const std::string many = render_svg(summaries);
  EXPECT_EQ(count(many, "<polyline"), 6u);

  const auto path = (std::filesystem::temp_directory_path() / "debias_report_test.svg").string();
  emit_plot(summaries, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), many);
  std::filesystem::remove(path);
}
