#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "xnet/petri.hpp"

namespace xnet {

/// Namespace URI of the extension elements (see docs/pnml-extensions.md).
inline constexpr std::string_view kPnmlExtensionNamespace = "urn:xnet:pnml-extensions:1";
inline constexpr std::string_view kPnmlNamespace = "http://www.pnml.org/version-2009/grammar/pnml";
inline constexpr std::string_view kPtNetType = "http://www.pnml.org/version-2009/grammar/ptnet";

struct PnmlNet {
  std::string id;
  std::string name;
  PetriNet net;
  Marking initial;

  bool operator==(const PnmlNet&) const = default;
};

struct PnmlDocument {
  std::string source_name;
  std::vector<PnmlNet> nets;

  /// Structural equality: nets and markings, ignoring source_name.
  bool structurally_equal(const PnmlDocument& other) const { return nets == other.nets; }
};

/// Throws ParseError for malformed XML, unknown extension elements or bad
/// attribute values, and ValidationError for nets that fail structural checks.
PnmlDocument parse_pnml(std::string_view bytes, std::string source_name = "<memory>");
PnmlDocument load_pnml_file(const std::filesystem::path& path);

std::string serialize_pnml(const PnmlDocument& doc);
void save_pnml_file(const PnmlDocument& doc, const std::filesystem::path& path);

/// Single-net document wrapper.
PnmlDocument make_document(std::string id, PetriNet net, Marking initial);

}  // namespace xnet
