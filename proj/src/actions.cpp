#include "xnet/actions.hpp"

#include <algorithm>
#include <array>

namespace xnet {

namespace {

Place input(const PlaceId& id) { return {id, PlaceKind::external_input, std::nullopt}; }
Place output(const PlaceId& id) { return {id, PlaceKind::external_output, std::nullopt}; }
Place internal(const PlaceId& id) { return {id, PlaceKind::plain, std::nullopt}; }

Transition immediate(std::string id) { return {std::move(id), TransitionKind::immediate, std::nullopt, std::nullopt}; }

Transition external(std::string id, std::string_view hook) {
  return {std::move(id), TransitionKind::external, std::nullopt, std::string(hook)};
}

Arc arc(const std::string& from, const std::string& to) { return {from, to, 1}; }

std::vector<Place> controller_places(const StandardActionPlaces& p) {
  return {input(p.enabled), output(p.ready),   output(p.ongoing), output(p.done),
          output(p.suspended), input(p.suspend), input(p.resume), input(p.restart)};
}

}  // namespace

std::string_view to_string(Aspect aspect) {
  switch (aspect) {
    case Aspect::impending: return "impending";
    case Aspect::ongoing: return "ongoing";
    case Aspect::suspended: return "suspended";
    case Aspect::completed: return "completed";
    case Aspect::inactive: return "inactive";
  }
  return "inactive";
}

BuiltNet<StandardActionPlaces> build_standard_controller() {
  StandardActionPlaces p;
  const PlaceId complete(kCompletePlace);

  auto places = controller_places(p);
  places.push_back(input(complete));

  std::vector<Transition> transitions{immediate("Prepare"), immediate("Start"), immediate("Finish"),
                                      external("SuspendT", hooks::kSuspend), external("ResumeT", hooks::kResume),
                                      external("RestartT", hooks::kRestart)};

  std::vector<Arc> arcs{
      arc(p.enabled, "Prepare"),   arc("Prepare", p.ready),
      arc(p.ready, "Start"),       arc("Start", p.ongoing),
      arc(p.ongoing, "SuspendT"),  arc(p.suspend, "SuspendT"),   arc("SuspendT", p.suspended),
      arc(p.suspended, "ResumeT"), arc(p.resume, "ResumeT"),     arc("ResumeT", p.ongoing),
      arc(p.suspended, "RestartT"), arc(p.restart, "RestartT"),  arc("RestartT", p.ready),
      arc(p.ongoing, "Finish"),    arc(complete, "Finish"),      arc("Finish", p.done),
  };

  PetriNet net(std::move(places), std::move(transitions), std::move(arcs));
  Marking initial = Marking::zero(net);
  return {std::move(net), p, std::move(initial)};
}

BuiltNet<MoveXnetPlaces> build_move_xnet(MoveXnetOptions options) {
  MoveXnetPlaces p;

  auto places = controller_places(p);
  places.push_back(internal(p.moving));
  places.push_back(internal(p.moved));
  places.push_back(input(p.arrived));

  std::vector<Transition> transitions{
      immediate("Prepare"),
      immediate("Start"),
      external("Move", hooks::kMove),
      {"Wait", TransitionKind::timed, options.wait_delay, std::nullopt},
      external("ResumeT", hooks::kResume),
      external("RestartT", hooks::kRestart),
  };

  std::vector<Arc> arcs{
      arc(p.enabled, "Prepare"), arc("Prepare", p.ready),
      // Start populates both Ongoing and the motion loop.
      arc(p.ready, "Start"), arc("Start", p.ongoing), arc("Start", p.moving),
      // Move reads Ongoing through a consume/produce pair.
      arc(p.moving, "Move"), arc(p.ongoing, "Move"), arc("Move", p.ongoing), arc("Move", p.moved),
      arc(p.moved, "Wait"), arc("Wait", p.moving),
      arc(p.suspended, "ResumeT"), arc(p.resume, "ResumeT"), arc("ResumeT", p.ongoing), arc("ResumeT", p.moving),
      arc(p.suspended, "RestartT"), arc(p.restart, "RestartT"), arc("RestartT", p.ready),
  };

  // Suspension and completion drain the motion-loop token from whichever place holds it.
  for (const auto& [suffix, loop_place] : std::array<std::pair<std::string, PlaceId>, 2>{
           {{".moving", p.moving}, {".moved", p.moved}}}) {
    const std::string suspend = "SuspendT" + suffix;
    transitions.push_back(external(suspend, hooks::kSuspend));
    arcs.push_back(arc(p.ongoing, suspend));
    arcs.push_back(arc(p.suspend, suspend));
    arcs.push_back(arc(loop_place, suspend));
    arcs.push_back(arc(suspend, p.suspended));

    const std::string finish = "Finish" + suffix;
    transitions.push_back(immediate(finish));
    arcs.push_back(arc(p.ongoing, finish));
    arcs.push_back(arc(p.arrived, finish));
    arcs.push_back(arc(loop_place, finish));
    arcs.push_back(arc(finish, p.done));
  }

  PetriNet net(std::move(places), std::move(transitions), std::move(arcs));
  Marking initial = Marking::zero(net);
  return {std::move(net), p, std::move(initial)};
}

std::string_view logical_transition_name(std::string_view id) {
  return id.substr(0, id.find('.'));
}

bool is_controller_transition(std::string_view id) {
  static constexpr std::array<std::string_view, 6> kController{"Prepare",  "Start",    "SuspendT",
                                                               "ResumeT", "RestartT", "Finish"};
  const auto name = logical_transition_name(id);
  return std::find(kController.begin(), kController.end(), name) != kController.end();
}

Aspect aspect_of(const StandardActionPlaces& places, const Marking& m) {
  if (m[places.done] >= 1) return Aspect::completed;
  if (m[places.suspended] >= 1) return Aspect::suspended;
  if (m[places.ongoing] >= 1) return Aspect::ongoing;
  if (m[places.enabled] >= 1 || m[places.ready] >= 1) return Aspect::impending;
  return Aspect::inactive;
}

PnmlDocument standard_controller_document() {
  auto built = build_standard_controller();
  auto doc = make_document("standard-controller", std::move(built.net), std::move(built.initial));
  doc.nets.front().name = "Standard action controller";
  return doc;
}

PnmlDocument move_xnet_document(MoveXnetOptions options) {
  auto built = build_move_xnet(options);
  auto doc = make_document("move-xnet", std::move(built.net), std::move(built.initial));
  doc.nets.front().name = "Move X-net";
  return doc;
}

void write_canonical_fixtures(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_pnml_file(standard_controller_document(), dir / "standard_controller.pnml");
  save_pnml_file(move_xnet_document(), dir / "move_xnet.pnml");
}

}  // namespace xnet
