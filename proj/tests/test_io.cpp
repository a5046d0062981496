#include <doctest.h>

#include <clocale>
#include <fstream>
#include <random>
#include <sstream>

#include "plantar/io.hpp"
#include "plantar/synth.hpp"
#include "test_support.hpp"

using namespace plantar;
using testing::code_of;
namespace fs = std::filesystem;

namespace {

TrialDataset small_trial(std::uint64_t seed = 3) {
  synth::SquatConfig s;
  s.duration_s = 6.0;
  auto t = synth::generate_trial(seed, Condition::B_rubber, s, synth::make_foot_model(seed));
  t.trial_id = "T1";
  t.participant_id = "P9";
  return t;
}

RidgeModel small_model() {
  const TrialDataset t = testing::linear_world(77, 600, 12);
  return *train_eval_trial(t, {}).channels[2].model;
}

void replace_line(const fs::path& path, std::size_t line_index, const std::string& text) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  lines[line_index] = text;
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("number formatting round-trips doubles") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    REQUIRE(io::parse_double(io::format_double(v), 1) == v);
  }
  CHECK(io::format_double(0.0) == "0");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(code_of([] { io::parse_double("1,5", 7); }) == Errc::ParseError);
  CHECK(code_of([] { io::parse_double("", 7); }) == Errc::ParseError);
  CHECK(code_of([] { io::parse_double("2x", 7); }) == Errc::ParseError);
}

TEST_CASE("formatting ignores the global C locale") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
    CHECK(io::format_double(1.5) == "1.5");
    CHECK(io::parse_double("1.5", 1) == 1.5);
  }
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("trial save/load round-trip") {
  const auto dir = testing::scratch_dir("io_trial");
  const TrialDataset t = small_trial();
  io::save_trial(t, dir / "p.csv", dir / "a.csv");
  const auto back = io::load_trial({dir / "p.csv", dir / "a.csv", Condition::B_rubber, "P9", "T1"});
  REQUIRE(back.size() == t.size());
  CHECK(back.condition == Condition::B_rubber);
  CHECK(back.participant_id == "P9");
  for (std::size_t k = 0; k < t.size(); ++k) {
    REQUIRE(back.frames[k].t_ms == t.frames[k].t_ms);
    REQUIRE(back.angles[k].t_ms == t.angles[k].t_ms);
    // 17 significant digits: bit-exact.
    REQUIRE(back.frames[k].values == t.frames[k].values);
    REQUIRE(back.angles[k].deg == t.angles[k].deg);
  }
}

TEST_CASE("malformed trial files") {
  const auto dir = testing::scratch_dir("io_bad");
  const TrialDataset t = small_trial();
  io::save_trial(t, dir / "p.csv", dir / "a.csv");
  const io::TrialFilePair pair{dir / "p.csv", dir / "a.csv"};

  SUBCASE("short pressure row names its line") {
    std::ifstream in(dir / "p.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::getline(in, row);
    in.close();
    row = row.substr(0, row.rfind(','));  // 2303 values
    replace_line(dir / "p.csv", 2, row);
    try {
      io::load_trial(pair);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ParseError);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("reordered angle header") {
    replace_line(dir / "a.csv", 0, "t_ms,knee_deg,ankle_deg,hip_deg,upper_deg");
    CHECK(code_of([&] { io::load_trial(pair); }) == Errc::HeaderMismatch);
  }
  SUBCASE("non-numeric cell") {
    replace_line(dir / "a.csv", 5, "80,1,2,abc,4");
    CHECK(code_of([&] { io::load_trial(pair); }) == Errc::ParseError);
  }
  SUBCASE("missing file") {
    CHECK(code_of([&] { io::load_trial({dir / "nope.csv", dir / "a.csv"}); }) == Errc::IoFailure);
  }
  SUBCASE("irregular timestamps need resampling") {
    replace_line(dir / "a.csv", 3, "41.5,10,40,40,15");
    std::string row = "41.5";
    for (std::size_t i = 0; i < kPixelCount; ++i) row += ",1";
    replace_line(dir / "p.csv", 3, row);
    CHECK(code_of([&] { io::load_trial(pair); }) == Errc::NonUniformSampling);
    io::TrialFilePair resampled = pair;
    resampled.resample = true;
    const auto back = io::load_trial(resampled);
    CHECK(back.size() == t.size());
    CHECK(back.frames[2].t_ms == 40);
  }
}

TEST_CASE("model save/load round-trip") {
  const auto dir = testing::scratch_dir("io_model");
  const RidgeModel m = small_model();
  io::save_model(m, dir / "m.txt");
  const RidgeModel back = io::load_model(dir / "m.txt");
  CHECK(back.channel == m.channel);
  CHECK(back.lambda == m.lambda);
  CHECK(back.selection.threshold == m.selection.threshold);
  CHECK(back.selection.indices == m.selection.indices);
  CHECK(back.pressure_z.mean == m.pressure_z.mean);
  CHECK(back.pressure_z.std == m.pressure_z.std);
  CHECK(back.angle_z.mean == m.angle_z.mean);
  CHECK(back.weights == m.weights);
  const std::string text = io::model_to_string(m);
  CHECK(text.rfind("version=1\n", 0) == 0);
  CHECK(io::model_to_string(back) == text);
}

TEST_CASE("corrupt model files") {
  const std::string text = io::model_to_string(small_model());
  SUBCASE("truncated") {
    CHECK(code_of([&] { io::model_from_string(text.substr(0, text.size() / 2)); }) == Errc::ParseError);
    CHECK(code_of([&] { io::model_from_string(text.substr(0, text.size() - 30)); }) ==
          Errc::ParseError);
  }
  SUBCASE("future version") {
    std::string v99 = text;
    v99.replace(0, 9, "version=99");
    CHECK(code_of([&] { io::model_from_string(v99); }) == Errc::VersionMismatch);
  }
  SUBCASE("missing key") {
    const auto pos = text.find("lambda=");
    std::string cut = text;
    cut.erase(pos, text.find('\n', pos) - pos + 1);
    CHECK(code_of([&] { io::model_from_string(cut); }) == Errc::ParseError);
  }
  SUBCASE("bad channel") {
    const auto pos = text.find("channel=");
    std::string bad = text;
    bad.replace(pos, text.find('\n', pos) - pos, "channel=elbow");
    CHECK(code_of([&] { io::model_from_string(bad); }) == Errc::ParseError);
  }
}

TEST_CASE("weight map export") {
  RidgeModel m;
  m.selection.indices = {flat_index(0, 0), flat_index(3, 7), flat_index(20, 20), flat_index(47, 47)};
  m.selection.threshold = 0.15;
  m.pressure_z = {{0, 0, 0, 0}, {1, 1, 1, 1}};
  m.angle_z = {{0}, {1}};
  m.weights = Eigen::Vector4d(0.5, -0.5, 0.5, -0.5);

  const auto map = io::weight_map(m);
  std::size_t nonzero = 0;
  for (double v : map.values) {
    CHECK(v >= 0.0);
    nonzero += v > 0.0;
  }
  CHECK(nonzero == 4);
  CHECK(map.values[flat_index(3, 7)] == 0.5);

  const std::string pgm = io::weight_map_pgm(map);
  CHECK(pgm.rfind("P2\n48 48\n255\n", 0) == 0);
  std::size_t full = 0, zero = 0, pos = pgm.find("255\n") + 4;
  std::istringstream body(pgm.substr(pos));
  for (int v; body >> v;) {
    full += v == 255;
    zero += v == 0;
  }
  CHECK(full == 4);
  CHECK(zero == kPixelCount - 4);

  // CSV re-read and re-scaled gives the same bytes.
  const auto back = io::parse_weight_map_csv(io::weight_map_csv(map));
  CHECK(io::weight_map_pgm(back) == pgm);

  const auto dir = testing::scratch_dir("io_wm");
  io::export_weight_map(small_model(), dir / "w");
  CHECK(fs::exists(dir / "w.csv"));
  CHECK(fs::exists(dir / "w.pgm"));
  CHECK(io::weight_map_pgm(io::parse_weight_map_csv(io::read_text(dir / "w.csv"))) ==
        io::read_text(dir / "w.pgm"));
}

TEST_CASE("evaluation report CSV round-trip keeps failures") {
  std::vector<io::EvalRecord> recs(2);
  recs[0].report = {"P01_A1", "P01", AngleChannel::knee, Condition::A_nothing, 3.25, 0.91, 225};
  recs[1].report = {"P01_A2", "P01", AngleChannel::upper, Condition::A_nothing, 0, 0, 0};
  recs[1].status = "ZERO_VARIANCE";
  recs[1].reason = "measured sequence is constant, really";
  const std::string csv = io::eval_records_csv(recs);
  const auto back = io::parse_eval_records_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].ok());
  CHECK(back[0].report.r2 == 0.91);
  CHECK(back[0].report.n_validation == 225);
  CHECK(!back[1].ok());
  CHECK(back[1].status == "ZERO_VARIANCE");
  CHECK(back[1].reason.find(',') == std::string::npos);
  CHECK(code_of([] { io::parse_eval_records_csv("id,foo\n"); }) == Errc::HeaderMismatch);
}

TEST_CASE("summary formats mean and sd") {
  std::vector<io::EvalRecord> recs;
  for (double v : {2.0, 3.0, 4.0, 5.0}) {
    io::EvalRecord r;
    r.report = {"t", "p", AngleChannel::ankle, Condition::A_nothing, v, 0.9, 10};
    recs.push_back(r);
  }
  const std::string s = io::summary_csv(recs);
  CHECK(s.find("A_nothing,ankle,rmse,4,3.5,") != std::string::npos);
  CHECK(s.find("3.5 \xC2\xB1 1.3 deg") != std::string::npos);
}
