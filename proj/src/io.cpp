#include "plantar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace plantar::io {

namespace {

// Splits on '\n', dropping a trailing '\r' and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(std::string_view text, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_error(line, "invalid integer '" + std::string(text) + "'");
  }
  return v;
}

std::string join_doubles(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

RawSeries read_series(const fs::path& path, const std::string& header, std::size_t width) {
  const std::string text = read_text(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(Errc::ParseError, path.string() + ": empty file");
  if (lines.front() != header) {
    throw Error(Errc::HeaderMismatch, path.string() + ": unexpected header");
  }
  RawSeries series;
  series.samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) {
      if (i + 1 == lines.size()) break;
      parse_error(line_no, "empty row");
    }
    const auto fields = split(lines[i], ',');
    if (fields.size() != width + 1) {
      parse_error(line_no, "expected " + std::to_string(width + 1) + " fields, found " +
                               std::to_string(fields.size()));
    }
    RawSeries::Sample s;
    s.t_ms = parse_double(fields[0], line_no);
    s.values.resize(width);
    for (std::size_t j = 0; j < width; ++j) s.values[j] = parse_double(fields[j + 1], line_no);
    series.samples.push_back(std::move(s));
  }
  if (series.empty()) throw Error(Errc::EmptySeries, path.string() + ": no data rows");
  return series;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error(Errc::IoFailure, "number formatting failed");
  return {buf, ptr};
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    parse_error(line, "invalid number '" + std::string(text.substr(0, 32)) + "'");
  }
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::string pressure_header() {
  std::string h = "t_ms";
  for (std::size_t i = 0; i < kPixelCount; ++i) h += ",p_" + std::to_string(i);
  return h;
}

std::string angles_header() { return "t_ms,ankle_deg,knee_deg,hip_deg,upper_deg"; }

RawSeries read_pressure_series(const fs::path& path) {
  return read_series(path, pressure_header(), kPixelCount);
}

RawSeries read_angle_series(const fs::path& path) {
  return read_series(path, angles_header(), kChannelCount);
}

TrialDataset load_trial(const TrialFilePair& pair) {
  const RawSeries pressure = read_pressure_series(pair.pressure);
  const RawSeries angles = read_angle_series(pair.angles);

  TrialDataset trial;
  if (pair.resample) {
    trial = align_streams(pressure, angles, pair.period_ms, pair.condition);
  } else {
    if (pressure.samples.size() != angles.samples.size()) {
      throw Error(Errc::LengthMismatch, std::to_string(pressure.samples.size()) +
                                            " pressure rows vs " +
                                            std::to_string(angles.samples.size()) + " angle rows");
    }
    trial.period_ms = pair.period_ms;
    trial.frames.resize(pressure.samples.size());
    trial.angles.resize(angles.samples.size());
    for (std::size_t k = 0; k < pressure.samples.size(); ++k) {
      const double tp = pressure.samples[k].t_ms;
      const double ta = angles.samples[k].t_ms;
      if (tp != std::round(tp) || ta != std::round(ta)) {
        throw Error(Errc::NonUniformSampling,
                    "row " + std::to_string(k + 2) + ": fractional timestamp; load with resampling");
      }
      trial.frames[k].t_ms = static_cast<std::int64_t>(tp);
      trial.frames[k].values = pressure.samples[k].values;
      trial.angles[k].t_ms = static_cast<std::int64_t>(ta);
      std::copy(angles.samples[k].values.begin(), angles.samples[k].values.end(),
                trial.angles[k].deg.begin());
    }
    trial.condition = pair.condition;
  }
  trial.participant_id = pair.participant_id;
  trial.trial_id = pair.trial_id;
  return validate_trial(std::move(trial));
}

void save_trial(const TrialDataset& trial, const fs::path& pressure, const fs::path& angles) {
  validate_trial(trial);
  std::string p = pressure_header() + "\n";
  for (const auto& f : trial.frames) {
    p += std::to_string(f.t_ms);
    for (double v : f.values) {
      p += ',';
      p += format_double(v);
    }
    p += '\n';
  }
  write_text(pressure, p);

  std::string a = angles_header() + "\n";
  for (const auto& s : trial.angles) {
    a += std::to_string(s.t_ms);
    for (double v : s.deg) {
      a += ',';
      a += format_double(v);
    }
    a += '\n';
  }
  write_text(angles, a);
}

std::string model_to_string(const RidgeModel& m) {
  validate_model(m);
  std::string out = "version=" + std::to_string(kModelVersion) + "\n";
  out += "channel=" + std::string(to_string(m.channel)) + "\n";
  out += "lambda=" + format_double(m.lambda) + "\n";
  out += "threshold=" + format_double(m.selection.threshold) + "\n";
  out += "selection=";
  for (std::size_t i = 0; i < m.selection.indices.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(m.selection.indices[i]);
  }
  out += "\npressure_mean=" + join_doubles(m.pressure_z.mean);
  out += "\npressure_std=" + join_doubles(m.pressure_z.std);
  out += "\nangle_mean=" + format_double(m.angle_z.mean[0]);
  out += "\nangle_std=" + format_double(m.angle_z.std[0]);
  out += "\nweights=" +
         join_doubles(std::span<const double>(m.weights.data(), static_cast<std::size_t>(m.weights.size())));
  out += "\n";
  return out;
}

RidgeModel model_from_string(std::string_view text) {
  const auto lines = split_lines(text);
  std::map<std::string, std::pair<std::string_view, std::size_t>, std::less<>> kv;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(i + 1, "expected key=value");
    kv[std::string(line.substr(0, eq))] = {line.substr(eq + 1), i + 1};
  }
  auto need = [&](const char* key) -> std::pair<std::string_view, std::size_t> {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw Error(Errc::ParseError, std::string("model file is missing '") + key + "'");
    }
    return it->second;
  };
  auto doubles = [&](const char* key) {
    const auto [value, line] = need(key);
    std::vector<double> out;
    for (auto f : split(value, ',')) out.push_back(parse_double(f, line));
    return out;
  };

  const auto [version_text, version_line] = need("version");
  if (parse_int(version_text, version_line) != kModelVersion) {
    throw Error(Errc::VersionMismatch, "model format version " + std::string(version_text) +
                                           " is not supported (expected " +
                                           std::to_string(kModelVersion) + ")");
  }
  RidgeModel m;
  try {
    m.channel = parse_channel(need("channel").first);
  } catch (const Error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  m.lambda = parse_double(need("lambda").first, need("lambda").second);
  m.selection.threshold = parse_double(need("threshold").first, need("threshold").second);
  {
    const auto [value, line] = need("selection");
    for (auto f : split(value, ',')) {
      const auto idx = parse_int(f, line);
      if (idx < 0) parse_error(line, "negative pixel index");
      m.selection.indices.push_back(static_cast<std::size_t>(idx));
    }
  }
  m.pressure_z.mean = doubles("pressure_mean");
  m.pressure_z.std = doubles("pressure_std");
  m.angle_z.mean = doubles("angle_mean");
  m.angle_z.std = doubles("angle_std");
  const auto w = doubles("weights");
  m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  try {
    validate_model(m);
  } catch (const Error& e) {
    throw Error(Errc::ParseError, std::string("inconsistent model file: ") + e.what());
  }
  return m;
}

void save_model(const RidgeModel& model, const fs::path& path) {
  write_text(path, model_to_string(model));
}

RidgeModel load_model(const fs::path& path) { return model_from_string(read_text(path)); }

WeightMap weight_map(const RidgeModel& model) {
  validate_model(model);
  WeightMap map;
  for (std::size_t i = 0; i < model.selection.size(); ++i) {
    map.values[model.selection.indices[i]] = std::abs(model.weights[static_cast<Eigen::Index>(i)]);
  }
  return map;
}

std::string weight_map_csv(const WeightMap& map) {
  std::string out = "row";
  for (int c = 0; c < kGridSide; ++c) out += ",c_" + std::to_string(c);
  out += '\n';
  for (int r = 0; r < kGridSide; ++r) {
    out += std::to_string(r);
    for (int c = 0; c < kGridSide; ++c) {
      out += ',';
      out += format_double(map.values[flat_index(r, c)]);
    }
    out += '\n';
  }
  return out;
}

WeightMap parse_weight_map_csv(std::string_view text) {
  auto lines = split_lines(text);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string header = "row";
  for (int c = 0; c < kGridSide; ++c) header += ",c_" + std::to_string(c);
  if (lines.empty() || lines.front() != header) {
    throw Error(Errc::HeaderMismatch, "weight map CSV header mismatch");
  }
  if (lines.size() != kGridSide + 1) {
    throw Error(Errc::ParseError, "weight map CSV needs 48 data rows");
  }
  WeightMap map;
  for (int r = 0; r < kGridSide; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const auto fields = split(lines[static_cast<std::size_t>(r) + 1], ',');
    if (fields.size() != kGridSide + 1 || parse_int(fields[0], line_no) != r) {
      parse_error(line_no, "malformed weight map row");
    }
    for (int c = 0; c < kGridSide; ++c) {
      const double v = parse_double(fields[static_cast<std::size_t>(c) + 1], line_no);
      if (!(v >= 0.0)) parse_error(line_no, "weight magnitudes must be >= 0");
      map.values[flat_index(r, c)] = v;
    }
  }
  return map;
}

std::string weight_map_pgm(const WeightMap& map) {
  const double peak = *std::max_element(map.values.begin(), map.values.end());
  std::string out = "P2\n48 48\n255\n";
  for (int r = 0; r < kGridSide; ++r) {
    for (int c = 0; c < kGridSide; ++c) {
      const double v = map.values[flat_index(r, c)];
      const long level = peak > 0.0 ? std::lround(255.0 * v / peak) : 0;
      if (c) out += ' ';
      out += std::to_string(std::clamp(level, 0L, 255L));
    }
    out += '\n';
  }
  return out;
}

WeightMap export_weight_map(const RidgeModel& model, const fs::path& prefix) {
  WeightMap map = weight_map(model);
  fs::path csv = prefix, pgm = prefix;
  csv += ".csv";
  pgm += ".pgm";
  write_text(csv, weight_map_csv(map));
  write_text(pgm, weight_map_pgm(map));
  return map;
}

namespace {

constexpr std::string_view kEvalHeader =
    "trial_id,participant,condition,channel,rmse_deg,r2,n_validation,status,reason";

}  // namespace

std::string eval_records_csv(std::span<const EvalRecord> records) {
  std::string out(kEvalHeader);
  out += '\n';
  for (const auto& rec : records) {
    const auto& r = rec.report;
    out += sanitize(r.trial_id) + ',' + sanitize(r.participant_id) + ',' +
           std::string(to_string(r.condition)) + ',' + std::string(to_string(r.channel)) + ',';
    if (rec.ok()) {
      out += format_double(r.rmse_deg) + ',' + format_double(r.r2) + ',' +
             std::to_string(r.n_validation);
    } else {
      out += ",,";
    }
    out += ',' + sanitize(rec.status) + ',' + sanitize(rec.reason) + '\n';
  }
  return out;
}

std::vector<EvalRecord> parse_eval_records_csv(std::string_view text) {
  auto lines = split_lines(text);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kEvalHeader) {
    throw Error(Errc::HeaderMismatch, "evaluation report header mismatch");
  }
  std::vector<EvalRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 9) parse_error(i + 1, "expected 9 fields");
    EvalRecord rec;
    rec.report.trial_id = f[0];
    rec.report.participant_id = f[1];
    try {
      rec.report.condition = parse_condition(f[2]);
      rec.report.channel = parse_channel(f[3]);
    } catch (const Error& e) {
      parse_error(i + 1, e.what());
    }
    rec.status = f[7];
    rec.reason = f[8];
    if (rec.ok()) {
      rec.report.rmse_deg = parse_double(f[4], i + 1);
      rec.report.r2 = parse_double(f[5], i + 1);
      rec.report.n_validation = static_cast<std::size_t>(parse_int(f[6], i + 1));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string comparisons_csv(std::span<const ComparisonRecord> records) {
  std::string out =
      "metric,channel,group_a,group_b,n_a,n_b,mean_a,sd_a,mean_b,sd_b,sw_w_a,sw_p_a,sw_w_b,"
      "sw_p_b,f_stat,f_df1,f_df2,f_p,welch_t,welch_df,welch_p,significant,status,reason\n";
  for (const auto& rec : records) {
    const auto& c = rec.result;
    out += std::string(stats::to_string(c.metric)) + ',' + std::string(to_string(c.channel)) + ',' +
           std::string(to_string(c.group_a)) + ',' + std::string(to_string(c.group_b)) + ',' +
           std::to_string(c.values_a.size()) + ',' + std::to_string(c.values_b.size()) + ',';
    if (rec.status == "ok") {
      const double nums[] = {stats::mean(c.values_a),       stats::sample_sd(c.values_a),
                             stats::mean(c.values_b),       stats::sample_sd(c.values_b),
                             c.normality_a.statistic,       c.normality_a.p_value,
                             c.normality_b.statistic,       c.normality_b.p_value,
                             c.variance_test.statistic,     c.variance_test.df,
                             c.variance_test.df2,           c.variance_test.p_value,
                             c.welch.statistic,             c.welch.df,
                             c.welch.p_value};
      for (double v : nums) out += format_double(v) + ',';
      out += c.significant ? "true" : "false";
    } else {
      out += std::string(15, ',');
    }
    out += ',' + sanitize(rec.status) + ',' + sanitize(rec.reason) + '\n';
  }
  return out;
}

std::string summary_csv(std::span<const EvalRecord> records) {
  std::string out = "condition,channel,metric,n,mean,sd,display\n";
  constexpr Condition conditions[] = {Condition::A_nothing, Condition::B_rubber, Condition::C_plastic};
  for (Condition cond : conditions) {
    for (AngleChannel ch : kAllChannels) {
      for (stats::Metric metric : {stats::Metric::rmse, stats::Metric::r2}) {
        std::vector<double> v;
        for (const auto& rec : records) {
          if (rec.ok() && rec.report.condition == cond && rec.report.channel == ch) {
            v.push_back(stats::metric_of(rec.report, metric));
          }
        }
        if (v.empty()) continue;
        const double m = stats::mean(v);
        const double sd = stats::sample_sd(v);
        char display[96];
        if (metric == stats::Metric::rmse) {
          std::snprintf(display, sizeof display, "%.1f \xC2\xB1 %.1f deg", m, sd);
        } else {
          std::snprintf(display, sizeof display, "%.3f \xC2\xB1 %.3f", m, sd);
        }
        out += std::string(to_string(cond)) + ',' + std::string(to_string(ch)) + ',' +
               std::string(stats::to_string(metric)) + ',' + std::to_string(v.size()) + ',' +
               format_double(m) + ',' + format_double(sd) + ',' + display + '\n';
      }
    }
  }
  return out;
}

}  // namespace plantar::io
