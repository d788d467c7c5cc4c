#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sceval/core.hpp"

namespace sceval {

/// Movement-type tags T1..T11.
enum class Tag {
  Straight = 0,   // T1
  NonStraight,    // T2
  Starting,       // T3
  Stopping,       // T4
  Still,          // T5
  Late,           // T6
  VeryLate,       // T7
  Full,           // T8
  Reappearance,   // T9
  Ttp,            // T10
  Nttp,           // T11
};

inline constexpr std::size_t kTagCount = 11;

inline constexpr std::array<Tag, kTagCount> kAllTags{
    Tag::Straight, Tag::NonStraight, Tag::Starting,     Tag::Stopping, Tag::Still, Tag::Late,
    Tag::VeryLate, Tag::Full,        Tag::Reappearance, Tag::Ttp,      Tag::Nttp};

/// "T1" .. "T11".
std::string_view tag_code(Tag t);
/// "Straight", "NonStraight", ...
std::string_view tag_name(Tag t);
/// Accepts either the code or the name.
std::optional<Tag> parse_tag(std::string_view text);

class TagSet {
 public:
  TagSet() = default;
  TagSet(std::initializer_list<Tag> tags) {
    for (Tag t : tags) insert(t);
  }

  bool contains(Tag t) const { return bits_.test(static_cast<std::size_t>(t)); }
  void insert(Tag t) { bits_.set(static_cast<std::size_t>(t)); }
  void erase(Tag t) { bits_.reset(static_cast<std::size_t>(t)); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  std::vector<Tag> tags() const;

  /// Space-free list of codes, e.g. "T1,T8,T11".
  std::string to_string() const;

  /// Checks T1/T2 exclusivity, T3/T4/T5 exclusivity, T7 -> T6, T8 -> !T6 and
  /// T10 xor T11. Returns the first violated law, or nullopt.
  std::optional<std::string> partition_violation() const;

  friend bool operator==(const TagSet&, const TagSet&) = default;

 private:
  std::bitset<kTagCount> bits_;
};

struct TagParams {
  double still_speed_max = 0.01;         // m/s; "still" means speed <= this
  double straight_max_deviation = 0.5;   // m
  double min_chord_for_shape = 1.0;      // m
  std::size_t late_max_frames = 3;
  std::size_t very_late_max_frames = 1;
  std::size_t stop_dwell_frames = 5;

  /// Throws InputError if any parameter is out of range.
  void validate() const;
};

/// Assigns the full tag set of a track. Throws InputError if `params` is invalid.
TagSet tag_track(const Track& track, const TagParams& params = {});

/// Maximum perpendicular distance of the track's valid positions to the
/// line through its first and last valid positions, with the chord length.
struct ChordDeviation {
  double chord_length = 0.0;
  double max_deviation = 0.0;
};
ChordDeviation chord_deviation(const Track& track);

struct TagFrequencies {
  std::size_t population = 0;
  std::map<Tag, double> fraction;
};

/// Fraction of tag sets containing each tag. With `filter`, only tag sets
/// containing that tag are counted (e.g. TTP-only). Throws InputError when
/// `tagsets` is empty. A filter that matches nothing yields population 0 and
/// all-zero fractions.
TagFrequencies tag_frequencies(std::span<const TagSet> tagsets, std::optional<Tag> filter = {});

}  // namespace sceval
