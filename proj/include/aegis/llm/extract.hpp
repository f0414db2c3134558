#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aegis/error.hpp"
#include "json.hpp"

namespace aegis::llm {

enum class ValueKind { Any, Object, Array, String, Integer, Number, Boolean };

struct Field;

/// Expected shape of a structured response: value kinds plus required keys.
/// Unlisted keys are allowed.
struct Shape {
  ValueKind kind = ValueKind::Any;
  std::vector<Field> fields;               // Object: required keys
  std::shared_ptr<const Shape> element;    // Array: shape of every element
  std::size_t min_items = 0;               // Array

  static Shape any();
  static Shape string();
  static Shape integer();
  static Shape number();
  static Shape boolean();
  static Shape object(std::vector<Field> fields = {});
  static Shape array_of(Shape element, std::size_t min_items = 0);
};

struct Field {
  std::string key;
  Shape shape;
};

class NoParsableObjectError : public Error {
 public:
  explicit NoParsableObjectError(std::string raw)
      : Error(Errc::NoParsableObject, "no JSON object or array in response"),
        raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class SchemaViolationError : public Error {
 public:
  SchemaViolationError(std::string path, const std::string& what)
      : Error(Errc::SchemaViolation, path + ": " + what), path_(std::move(path)) {}
  /// JSON-path style location, e.g. "$.Risk Assessment[3].Scenario".
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct Fence {
  std::string lang;
  std::string body;
  std::size_t begin = 0;  // offset of the opening backticks
  std::size_t end = 0;    // offset one past the closing backticks
  bool closed = true;
};

/// Code fences in order of appearance. Fences may span lines or sit on one
/// line. An unclosed trailing fence yields its remainder with closed=false.
std::vector<Fence> find_fences(std::string_view text);
std::vector<std::string> fenced_blocks(std::string_view text);

/// Strips one surrounding code fence if the whole text is fenced.
std::string strip_fence(std::string_view text);

/// Locates the first balanced top-level object or array (fenced bodies are
/// tried before the bare text), parses it with comments tolerated and
/// validates it against `shape`. A candidate whose top-level kind disagrees
/// with `shape` is skipped in favour of a later one.
/// Throws NoParsableObjectError or SchemaViolationError.
nlohmann::json extract_structured(std::string_view raw, const Shape& shape);

/// Throws SchemaViolationError at the first mismatch.
void validate_shape(const nlohmann::json& value, const Shape& shape, const std::string& path = "$");

}  // namespace aegis::llm
