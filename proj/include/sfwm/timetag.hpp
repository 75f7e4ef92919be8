#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sfwm {

/// Detectors behind the two fiber beam splitters.
enum class DetectorId : std::uint8_t { k1a = 0, k1b = 1, k2a = 2, k2b = 3 };

inline constexpr std::array<DetectorId, 4> kAllDetectors{DetectorId::k1a, DetectorId::k1b,
                                                         DetectorId::k2a, DetectorId::k2b};

constexpr std::string_view to_string(DetectorId d) noexcept {
  constexpr std::array<std::string_view, 4> names{"1a", "1b", "2a", "2b"};
  return names[static_cast<std::size_t>(d)];
}

constexpr int field_of(DetectorId d) noexcept { return static_cast<int>(d) < 2 ? 1 : 2; }

/// Sorted tick stamps of one detector, one block per trial. Trials are
/// dense: block i holds trial index i.
class TimeTagStream {
 public:
  TimeTagStream() = default;
  explicit TimeTagStream(DetectorId id) : id_(id) {}

  DetectorId detector() const noexcept { return id_; }
  std::size_t n_trials() const noexcept { return offsets_.size() - 1; }
  std::size_t total() const noexcept { return ticks_.size(); }

  std::span<const std::uint64_t> trial(std::size_t i) const {
    return {ticks_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const std::uint64_t> all_ticks() const noexcept { return ticks_; }

  /// Appends the next trial; ticks must already be strictly increasing.
  void append_trial(std::span<const std::uint64_t> ticks) {
    ticks_.insert(ticks_.end(), ticks.begin(), ticks.end());
    offsets_.push_back(ticks_.size());
  }

  bool operator==(const TimeTagStream&) const = default;

 private:
  DetectorId id_ = DetectorId::k1a;
  std::vector<std::uint64_t> ticks_;
  std::vector<std::size_t> offsets_{0};
};

/// The four detector streams of one acquisition.
struct Run {
  double tick = 100e-12;          // s
  std::uint64_t trial_ticks = 0;  // trial duration in ticks
  std::uint32_t n_trials = 0;
  std::array<TimeTagStream, 4> streams{TimeTagStream(DetectorId::k1a), TimeTagStream(DetectorId::k1b),
                                       TimeTagStream(DetectorId::k2a), TimeTagStream(DetectorId::k2b)};

  const TimeTagStream& stream(DetectorId d) const { return streams[static_cast<std::size_t>(d)]; }
  TimeTagStream& stream(DetectorId d) { return streams[static_cast<std::size_t>(d)]; }
  double live_time() const noexcept { return static_cast<double>(n_trials) * trial_ticks * tick; }

  bool operator==(const Run&) const = default;
};

}  // namespace sfwm
