#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plantar {

/// Sensor sheet geometry: 48 x 48 cells, 10 mm pitch.
inline constexpr int kGridSide = 48;
inline constexpr std::size_t kPixelCount = kGridSide * kGridSide;
inline constexpr std::size_t kChannelCount = 4;
inline constexpr std::int64_t kDefaultPeriodMs = 20;

enum class Errc {
  NonUniformSampling,
  LengthMismatch,
  NegativePressure,
  NonFinite,
  TooShort,
  OutOfRange,
  EmptySeries,
  NoOverlap,
  EmptySelection,
  ZeroVariance,
  ChannelMismatch,
  DimensionMismatch,
  NumericalFailure,
  TooSmall,
  TooLarge,
  DegenerateSample,
  DegenerateBoth,
  InsufficientGroup,
  ParseError,
  HeaderMismatch,
  IoFailure,
  VersionMismatch,
  InvalidArgument,
};

/// Stable upper-snake-case name, used in reports and CLI error lines.
std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

enum class Condition { A_nothing, B_rubber, C_plastic };
enum class AngleChannel { ankle = 0, knee = 1, hip = 2, upper = 3 };

inline constexpr std::array<AngleChannel, kChannelCount> kAllChannels = {
    AngleChannel::ankle, AngleChannel::knee, AngleChannel::hip, AngleChannel::upper};

std::string_view to_string(Condition c);
std::string_view to_string(AngleChannel c);
/// Accepts "a"/"b"/"c" (any case) and the full names ("A_nothing", ...).
Condition parse_condition(std::string_view text);
AngleChannel parse_channel(std::string_view text);
/// Short single-letter label ("A", "B", "C").
char condition_letter(Condition c);

constexpr std::size_t index_of(AngleChannel c) noexcept { return static_cast<std::size_t>(c); }

/// Row-major flattening; this order is shared by every file format.
constexpr std::size_t flat_index(int row, int col) noexcept {
  return static_cast<std::size_t>(row) * kGridSide + static_cast<std::size_t>(col);
}

struct GridCell {
  int row;
  int col;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

constexpr GridCell grid_cell(std::size_t flat) noexcept {
  return {static_cast<int>(flat / kGridSide), static_cast<int>(flat % kGridSide)};
}

/// One timestamped sheet reading. values has kPixelCount entries, row-major.
struct PressureFrame {
  std::int64_t t_ms = 0;
  std::vector<double> values = std::vector<double>(kPixelCount, 0.0);

  double at(int row, int col) const { return values[flat_index(row, col)]; }
  double total() const;
};

struct AngleSample {
  std::int64_t t_ms = 0;
  /// Degrees, indexed by AngleChannel.
  std::array<double, kChannelCount> deg{};

  double operator[](AngleChannel c) const { return deg[index_of(c)]; }
  double& operator[](AngleChannel c) { return deg[index_of(c)]; }
};

/// Time-aligned uniform-rate pressure frames and angle samples from one trial.
struct TrialDataset {
  std::int64_t period_ms = kDefaultPeriodMs;
  std::vector<PressureFrame> frames;
  std::vector<AngleSample> angles;
  Condition condition = Condition::A_nothing;
  std::string participant_id;
  std::string trial_id;

  std::size_t size() const noexcept { return frames.size(); }
  /// Series of one angle channel over [first, first + count).
  std::vector<double> angle_series(AngleChannel c, std::size_t first, std::size_t count) const;
  std::vector<double> angle_series(AngleChannel c) const {
    return angle_series(c, 0, angles.size());
  }
  /// Series of one pixel over [first, first + count).
  std::vector<double> pixel_series(std::size_t pixel, std::size_t first, std::size_t count) const;
};

/// Throws NegativePressure / NonFinite / DimensionMismatch.
void validate_frame(const PressureFrame& frame);

/// Checks every TrialDataset invariant; returns the trial unchanged.
const TrialDataset& validate_trial(const TrialDataset& trial);
TrialDataset validate_trial(TrialDataset&& trial);

}  // namespace plantar
