#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "xnet/geometry.hpp"

namespace xnet {

enum class ActSpecKind { command, notification };
enum class Predicate { move, stop, continue_, redirect_implicit };
enum class Speed { slow, normal, fast };

std::string_view to_string(ActSpecKind kind);
std::string_view to_string(Predicate predicate);
std::string_view to_string(Speed speed);

struct ObjectDescriptor {
  std::string color;
  std::string shape = "box";

  bool operator==(const ObjectDescriptor&) const = default;
};

/// What a notification says about an object the robot sensed.
struct ReportedObject {
  std::string name;
  std::string color;
  Vec2 position;
  double size = 0.0;

  bool operator==(const ReportedObject&) const = default;
};

/// Action request from the language side, or a notification back to the
/// operator. Commands with predicate move carry speed and goal; no other
/// predicate does. Notifications may omit the predicate.
struct ActSpec {
  ActSpecKind kind = ActSpecKind::command;
  std::string agent;
  std::optional<Predicate> predicate;
  std::optional<Speed> speed;
  std::optional<ObjectDescriptor> goal;
  std::uint64_t sequence = 0;

  // notification payload
  std::string topic;
  std::string message;
  std::optional<ReportedObject> object;

  bool operator==(const ActSpec&) const = default;
  /// Equality ignoring the sequence number.
  bool same_fields(const ActSpec& other) const;
};

/// Throws ValidationError when the move/speed/goal coupling is violated.
void validate(const ActSpec& spec);

std::vector<std::string> default_colors();

/// Parses one command. Throws CommandParseError (with the nearest production
/// as hint) or VocabularyError for a color outside `colors`.
ActSpec parse_command(std::string_view text, const std::vector<std::string>& colors, std::uint64_t sequence);

/// Canonical text for a command ActSpec; throws ValidationError for
/// notifications and implicit redirects, which have no surface form.
std::string render_command(const ActSpec& spec);

/// Stateful front end that numbers parsed commands.
class CommandParser {
 public:
  explicit CommandParser(std::vector<std::string> colors = default_colors()) : colors_(std::move(colors)) {}

  ActSpec parse(std::string_view text) { return parse_command(text, colors_, ++sequence_); }
  std::uint64_t next_sequence() { return ++sequence_; }
  const std::vector<std::string>& colors() const noexcept { return colors_; }

 private:
  std::vector<std::string> colors_;
  std::atomic<std::uint64_t> sequence_{0};
};

nlohmann::json to_json(const ActSpec& spec);
/// Throws ValidationError on malformed input.
ActSpec actspec_from_json(const nlohmann::json& j);

}  // namespace xnet
