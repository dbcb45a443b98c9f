#ifndef ADSIEVE_PAGELOAD_HPP_
#define ADSIEVE_PAGELOAD_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace adsieve {

enum class ResourceKind { kDocument, kScript, kImage, kStylesheet, kIframe, kOther };
enum class ScriptScope { kInline, kReferenced };
enum class InteractionAction {
  kInsertNode,
  kModifyAttribute,
  kRemoveAttribute,
  kAttachListener,
};

std::string_view ToString(ResourceKind kind);
std::string_view ToString(ScriptScope scope);
std::string_view ToString(InteractionAction action);
std::optional<ResourceKind> ParseResourceKind(std::string_view s);
std::optional<InteractionAction> ParseInteractionAction(std::string_view s);

struct Initiator {
  enum class Type { kParser, kScript, kElement };
  Type type = Type::kParser;
  std::string id;  // script_id or elem_id; empty for the parser

  bool operator==(const Initiator&) const = default;
};

struct DomNode {
  std::string elem_id;
  std::string tag_name;
  std::optional<std::string> parent_id;
  std::map<std::string, std::string> attributes;
  std::string base_uri;

  bool operator==(const DomNode&) const = default;
};

struct HttpRequest {
  std::string request_id;
  std::string url;
  Initiator initiator;
  ResourceKind resource_kind = ResourceKind::kOther;

  bool operator==(const HttpRequest&) const = default;
};

struct ScriptUnit {
  std::string script_id;
  ScriptScope scope = ScriptScope::kInline;
  std::optional<std::string> source_url;
  std::string attached_to;

  bool operator==(const ScriptUnit&) const = default;
};

struct JsInteraction {
  std::string script_id;
  std::string target_elem;
  InteractionAction action = InteractionAction::kInsertNode;

  bool operator==(const JsInteraction&) const = default;
};

using EventPayload = std::variant<DomNode, HttpRequest, ScriptUnit, JsInteraction>;

struct Event {
  std::int64_t seq = 0;
  EventPayload payload;

  bool operator==(const Event&) const = default;
};

struct PageLoadLog {
  std::string page_url;
  std::vector<Event> events;
  std::map<std::string, std::string> metadata;

  bool operator==(const PageLoadLog&) const = default;
};

// Parses the JSON-lines log format. The first non-empty line is the header
// {"page_url": ..., "metadata": {...}}; every further line is one event.
// Throws ParseError (with line number), HeaderError or IntegrityError.
PageLoadLog ParseLog(std::string_view text);
PageLoadLog ReadLogFile(const std::filesystem::path& path);

// Checks every PageLoadLog invariant; throws on the first violation.
void ValidateLog(const PageLoadLog& log);

// Canonical serialization (sorted keys, one record per line, trailing
// newline). ParseLog(SerializeLog(x)) == x for every valid log.
std::string SerializeLog(const PageLoadLog& log);

}  // namespace adsieve

#endif  // ADSIEVE_PAGELOAD_HPP_
