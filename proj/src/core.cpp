#include "plantar/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace plantar {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NonUniformSampling: return "NON_UNIFORM_SAMPLING";
    case Errc::LengthMismatch: return "LENGTH_MISMATCH";
    case Errc::NegativePressure: return "NEGATIVE_PRESSURE";
    case Errc::NonFinite: return "NON_FINITE";
    case Errc::TooShort: return "TOO_SHORT";
    case Errc::OutOfRange: return "OUT_OF_RANGE";
    case Errc::EmptySeries: return "EMPTY_SERIES";
    case Errc::NoOverlap: return "NO_OVERLAP";
    case Errc::EmptySelection: return "EMPTY_SELECTION";
    case Errc::ZeroVariance: return "ZERO_VARIANCE";
    case Errc::ChannelMismatch: return "CHANNEL_MISMATCH";
    case Errc::DimensionMismatch: return "DIMENSION_MISMATCH";
    case Errc::NumericalFailure: return "NUMERICAL_FAILURE";
    case Errc::TooSmall: return "TOO_SMALL";
    case Errc::TooLarge: return "TOO_LARGE";
    case Errc::DegenerateSample: return "DEGENERATE_SAMPLE";
    case Errc::DegenerateBoth: return "DEGENERATE_BOTH";
    case Errc::InsufficientGroup: return "INSUFFICIENT_GROUP";
    case Errc::ParseError: return "PARSE_ERROR";
    case Errc::HeaderMismatch: return "HEADER_MISMATCH";
    case Errc::IoFailure: return "IO_FAILURE";
    case Errc::VersionMismatch: return "VERSION_MISMATCH";
    case Errc::InvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::A_nothing: return "A_nothing";
    case Condition::B_rubber: return "B_rubber";
    case Condition::C_plastic: return "C_plastic";
  }
  return "?";
}

std::string_view to_string(AngleChannel c) {
  switch (c) {
    case AngleChannel::ankle: return "ankle";
    case AngleChannel::knee: return "knee";
    case AngleChannel::hip: return "hip";
    case AngleChannel::upper: return "upper";
  }
  return "?";
}

char condition_letter(Condition c) { return "ABC"[static_cast<int>(c)]; }

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

Condition parse_condition(std::string_view text) {
  const std::string t = lower(text);
  if (t == "a" || t == "a_nothing" || t == "nothing") return Condition::A_nothing;
  if (t == "b" || t == "b_rubber" || t == "rubber") return Condition::B_rubber;
  if (t == "c" || t == "c_plastic" || t == "plastic") return Condition::C_plastic;
  throw Error(Errc::InvalidArgument, "unknown condition '" + std::string(text) + "'");
}

AngleChannel parse_channel(std::string_view text) {
  const std::string t = lower(text);
  for (AngleChannel c : kAllChannels) {
    if (t == to_string(c)) return c;
  }
  throw Error(Errc::InvalidArgument, "unknown angle channel '" + std::string(text) + "'");
}

double PressureFrame::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

std::vector<double> TrialDataset::angle_series(AngleChannel c, std::size_t first,
                                               std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = angles[first + k][c];
  return out;
}

std::vector<double> TrialDataset::pixel_series(std::size_t pixel, std::size_t first,
                                               std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = frames[first + k].values[pixel];
  return out;
}

void validate_frame(const PressureFrame& frame) {
  if (frame.values.size() != kPixelCount) {
    throw Error(Errc::DimensionMismatch, "frame at t=" + std::to_string(frame.t_ms) + " ms has " +
                                             std::to_string(frame.values.size()) +
                                             " cells, expected 2304");
  }
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    const double v = frame.values[i];
    if (!std::isfinite(v)) {
      throw Error(Errc::NonFinite, "frame at t=" + std::to_string(frame.t_ms) +
                                       " ms has a non-finite value at pixel " + std::to_string(i));
    }
    if (v < 0.0) {
      throw Error(Errc::NegativePressure, "frame at t=" + std::to_string(frame.t_ms) +
                                              " ms has negative pressure at pixel " +
                                              std::to_string(i));
    }
  }
}

const TrialDataset& validate_trial(const TrialDataset& trial) {
  if (trial.period_ms <= 0) {
    throw Error(Errc::NonUniformSampling, "period_ms must be positive");
  }
  if (trial.frames.size() != trial.angles.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(trial.frames.size()) + " frames vs " +
                                          std::to_string(trial.angles.size()) + " angle samples");
  }
  if (trial.frames.size() < 2) {
    throw Error(Errc::TooShort, "a trial needs at least 2 samples");
  }
  for (std::size_t k = 0; k < trial.frames.size(); ++k) {
    const auto& f = trial.frames[k];
    const auto& a = trial.angles[k];
    if (f.t_ms != a.t_ms) {
      throw Error(Errc::NonUniformSampling, "sample " + std::to_string(k) +
                                                ": frame and angle timestamps differ (" +
                                                std::to_string(f.t_ms) + " vs " +
                                                std::to_string(a.t_ms) + " ms)");
    }
    if (k > 0 && f.t_ms - trial.frames[k - 1].t_ms != trial.period_ms) {
      throw Error(Errc::NonUniformSampling,
                  "gap of " + std::to_string(f.t_ms - trial.frames[k - 1].t_ms) +
                      " ms before sample " + std::to_string(k) + ", expected " +
                      std::to_string(trial.period_ms));
    }
    validate_frame(f);
    for (double v : a.deg) {
      if (!std::isfinite(v)) {
        throw Error(Errc::NonFinite, "non-finite angle at t=" + std::to_string(a.t_ms) + " ms");
      }
    }
  }
  return trial;
}

TrialDataset validate_trial(TrialDataset&& trial) {
  validate_trial(static_cast<const TrialDataset&>(trial));
  return std::move(trial);
}

}  // namespace plantar
