#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "xnet/petri.hpp"
#include "xnet/pnml.hpp"

namespace xnet {

/// Place ids of the standard action controller.
struct StandardActionPlaces {
  PlaceId enabled = "Enabled";      // external input
  PlaceId ready = "Ready";          // external output
  PlaceId ongoing = "Ongoing";      // external output
  PlaceId done = "Done";            // external output
  PlaceId suspended = "Suspended";  // external output
  PlaceId suspend = "Suspend";      // external input
  PlaceId resume = "Resume";        // external input
  PlaceId restart = "Restart";      // external input
};

struct MoveXnetPlaces : StandardActionPlaces {
  PlaceId moving = "Moving";
  PlaceId moved = "Moved";
  PlaceId arrived = "Arrived";  // external input, marked by the motion backend
};

/// Hook names bound by whoever runs these nets.
namespace hooks {
inline constexpr std::string_view kMove = "Move";
inline constexpr std::string_view kSuspend = "SuspendT";
inline constexpr std::string_view kResume = "ResumeT";
inline constexpr std::string_view kRestart = "RestartT";
}  // namespace hooks

/// Completion input of the bare controller; the Move X-net uses Arrived instead.
inline constexpr std::string_view kCompletePlace = "Complete";

enum class Aspect { impending, ongoing, suspended, completed, inactive };

std::string_view to_string(Aspect aspect);

template <class Places>
struct BuiltNet {
  PetriNet net;
  Places places;
  Marking initial;
};

/// Enabled -> Prepare -> Ready -> Start -> Ongoing, with suspend/resume/restart
/// around Ongoing and Finish (Ongoing + Complete) -> Done. SuspendT, ResumeT
/// and RestartT are external transitions.
BuiltNet<StandardActionPlaces> build_standard_controller();

struct MoveXnetOptions {
  Ticks wait_delay = 0;
};

/// The controller plus the Moving/Moved motion loop. Transitions that must
/// collect the motion-loop token wherever it sits come in two variants,
/// `<name>.moving` and `<name>.moved`, sharing one logical name and hook.
BuiltNet<MoveXnetPlaces> build_move_xnet(MoveXnetOptions options = {});

/// "SuspendT.moved" -> "SuspendT"; ids without a variant suffix are returned unchanged.
std::string_view logical_transition_name(std::string_view id);

/// Prepare, Start, SuspendT, ResumeT, RestartT, Finish (by logical name).
bool is_controller_transition(std::string_view id);

Aspect aspect_of(const StandardActionPlaces& places, const Marking& m);

PnmlDocument standard_controller_document();
PnmlDocument move_xnet_document(MoveXnetOptions options = {});

/// Writes standard_controller.pnml and move_xnet.pnml into `dir`.
void write_canonical_fixtures(const std::filesystem::path& dir);

}  // namespace xnet
