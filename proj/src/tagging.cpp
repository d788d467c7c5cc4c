#include "sceval/tagging.hpp"

#include <algorithm>
#include <cmath>

namespace sceval {

namespace {

struct TagInfo {
  std::string_view code;
  std::string_view name;
};

constexpr std::array<TagInfo, kTagCount> kTagInfo{{
    {"T1", "Straight"},
    {"T2", "NonStraight"},
    {"T3", "Starting"},
    {"T4", "Stopping"},
    {"T5", "Still"},
    {"T6", "Late"},
    {"T7", "VeryLate"},
    {"T8", "Full"},
    {"T9", "Reappearance"},
    {"T10", "TTP"},
    {"T11", "NTTP"},
}};

}  // namespace

std::string_view tag_code(Tag t) { return kTagInfo[static_cast<std::size_t>(t)].code; }
std::string_view tag_name(Tag t) { return kTagInfo[static_cast<std::size_t>(t)].name; }

std::optional<Tag> parse_tag(std::string_view text) {
  for (Tag t : kAllTags) {
    if (tag_code(t) == text || tag_name(t) == text) return t;
  }
  return std::nullopt;
}

std::vector<Tag> TagSet::tags() const {
  std::vector<Tag> out;
  for (Tag t : kAllTags) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

std::string TagSet::to_string() const {
  std::string out;
  for (Tag t : tags()) {
    if (!out.empty()) out += ',';
    out += tag_code(t);
  }
  return out;
}

std::optional<std::string> TagSet::partition_violation() const {
  if (contains(Tag::Straight) && contains(Tag::NonStraight)) return "T1 and T2 both set";
  const int motion = contains(Tag::Starting) + contains(Tag::Stopping) + contains(Tag::Still);
  if (motion > 1) return "more than one of T3/T4/T5 set";
  if (contains(Tag::VeryLate) && !contains(Tag::Late)) return "T7 set without T6";
  if (contains(Tag::Full) && contains(Tag::Late)) return "T8 and T6 both set";
  if (contains(Tag::Ttp) == contains(Tag::Nttp)) return "not exactly one of T10/T11 set";
  return std::nullopt;
}

void TagParams::validate() const {
  if (!(still_speed_max > 0.0)) throw InputError("still_speed_max must be > 0");
  if (!(straight_max_deviation > 0.0)) throw InputError("straight_max_deviation must be > 0");
  if (!(min_chord_for_shape > 0.0)) throw InputError("min_chord_for_shape must be > 0");
  if (late_max_frames == 0) throw InputError("late_max_frames must be > 0");
  if (very_late_max_frames == 0) throw InputError("very_late_max_frames must be > 0");
  if (stop_dwell_frames == 0) throw InputError("stop_dwell_frames must be > 0");
  if (very_late_max_frames > late_max_frames) {
    throw InputError("very_late_max_frames must not exceed late_max_frames");
  }
  // A fully observed track must never count as late.
  if (late_max_frames >= kHistoryFrames) {
    throw InputError("late_max_frames must be below the number of observed frames");
  }
}

ChordDeviation chord_deviation(const Track& track) {
  const auto valid = track.valid_states();
  const Point2 a = valid.front().state->position();
  const Point2 b = valid.back().state->position();
  const double len = distance(a, b);
  ChordDeviation out{len, 0.0};
  if (len == 0.0) return out;
  const double ux = (b.x - a.x) / len;
  const double uy = (b.y - a.y) / len;
  for (const FrameState& fs : valid) {
    const double dx = fs.state->x - a.x;
    const double dy = fs.state->y - a.y;
    out.max_deviation = std::max(out.max_deviation, std::abs(dx * uy - dy * ux));
  }
  return out;
}

TagSet tag_track(const Track& track, const TagParams& params) {
  params.validate();
  const double still = params.still_speed_max;

  TagSet tags;
  tags.insert(track.is_ttp() ? Tag::Ttp : Tag::Nttp);

  std::size_t n_obs = 0;
  std::size_t first_obs = kFrameCount;
  bool any_obs_moving = false;
  bool any_fut = false;
  bool any_fut_moving = false;
  for (const FrameState& fs : track.valid_states()) {
    const bool moving = speed(*fs.state) > still;
    if (fs.frame <= kCurrentIndex) {
      ++n_obs;
      first_obs = std::min(first_obs, fs.frame);
      any_obs_moving = any_obs_moving || moving;
    } else {
      any_fut = true;
      any_fut_moving = any_fut_moving || moving;
    }
  }

  // Motion. An unobserved track is neither still nor moving during observation.
  const bool still_obs = n_obs > 0 && !any_obs_moving;
  if (still_obs && any_fut_moving) {
    tags.insert(Tag::Starting);
  } else if (still_obs && any_fut) {
    tags.insert(Tag::Still);
  } else if (any_obs_moving) {
    // Length of the run of still valid frames that ends the track, restricted
    // to the future.
    std::size_t dwell = 0;
    for (std::size_t f = kFrameCount; f-- > kHistoryFrames;) {
      const auto s = track.at(f);
      if (!s) continue;
      if (speed(*s) > still) break;
      ++dwell;
    }
    if (dwell >= params.stop_dwell_frames) tags.insert(Tag::Stopping);
  }

  // Shape over all valid frames.
  const ChordDeviation cd = chord_deviation(track);
  if (cd.chord_length >= params.min_chord_for_shape) {
    tags.insert(cd.max_deviation <= params.straight_max_deviation ? Tag::Straight
                                                                  : Tag::NonStraight);
  }

  // Observation availability.
  const bool current_valid = track.valid_at(kCurrentIndex);
  if (n_obs == kHistoryFrames) tags.insert(Tag::Full);
  const bool contiguous_to_current = current_valid && first_obs + n_obs == kHistoryFrames;
  if (contiguous_to_current && n_obs <= params.late_max_frames) {
    tags.insert(Tag::Late);
    if (n_obs <= params.very_late_max_frames) tags.insert(Tag::VeryLate);
  }
  if (!current_valid && n_obs > 0 && any_fut) tags.insert(Tag::Reappearance);

  return tags;
}

TagFrequencies tag_frequencies(std::span<const TagSet> tagsets, std::optional<Tag> filter) {
  if (tagsets.empty()) throw InputError("tag frequencies of an empty collection");
  std::array<std::size_t, kTagCount> counts{};
  TagFrequencies out;
  for (const TagSet& ts : tagsets) {
    if (filter && !ts.contains(*filter)) continue;
    ++out.population;
    for (Tag t : kAllTags) counts[static_cast<std::size_t>(t)] += ts.contains(t);
  }
  for (Tag t : kAllTags) {
    out.fraction[t] = out.population == 0
                          ? 0.0
                          : static_cast<double>(counts[static_cast<std::size_t>(t)]) /
                                static_cast<double>(out.population);
  }
  return out;
}

}  // namespace sceval
