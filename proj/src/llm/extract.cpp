#include "aegis/llm/extract.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "aegis/util.hpp"

namespace aegis::llm {

using nlohmann::json;

Shape Shape::any() { return Shape{}; }
Shape Shape::string() { return Shape{ValueKind::String, {}, nullptr, 0}; }
Shape Shape::integer() { return Shape{ValueKind::Integer, {}, nullptr, 0}; }
Shape Shape::number() { return Shape{ValueKind::Number, {}, nullptr, 0}; }
Shape Shape::boolean() { return Shape{ValueKind::Boolean, {}, nullptr, 0}; }
Shape Shape::object(std::vector<Field> fields) {
  return Shape{ValueKind::Object, std::move(fields), nullptr, 0};
}
Shape Shape::array_of(Shape element, std::size_t min_items) {
  return Shape{ValueKind::Array, {}, std::make_shared<const Shape>(std::move(element)), min_items};
}

namespace {

const std::set<std::string, std::less<>> kKnownLangs = {
    "json", "gherkin", "mermaid", "markdown", "md", "text", "javascript", "js", "yaml", "feature"};

std::string_view kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Any: return "any";
    case ValueKind::Object: return "object";
    case ValueKind::Array: return "array";
    case ValueKind::String: return "string";
    case ValueKind::Integer: return "integer";
    case ValueKind::Number: return "number";
    case ValueKind::Boolean: return "boolean";
  }
  return "any";
}

bool kind_matches(const json& v, ValueKind k) {
  switch (k) {
    case ValueKind::Any: return true;
    case ValueKind::Object: return v.is_object();
    case ValueKind::Array: return v.is_array();
    case ValueKind::String: return v.is_string();
    case ValueKind::Integer:
      if (v.is_number_integer()) return true;
      if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::isfinite(d) && std::floor(d) == d;
      }
      return false;
    case ValueKind::Number: return v.is_number();
    case ValueKind::Boolean: return v.is_boolean();
  }
  return false;
}

// End offset (one past) of the balanced structure opening at `start`, or
// npos when brackets mismatch or never close. Strings and comments are
// skipped.
std::size_t balanced_end(std::string_view s, std::size_t start) {
  std::string stack;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') {
      for (++i; i < s.size() && s[i] != '"'; ++i)
        if (s[i] == '\\') ++i;
      if (i >= s.size()) return std::string_view::npos;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const std::size_t close = s.find("*/", i + 2);
      if (close == std::string_view::npos) return std::string_view::npos;
      i = close + 1;
    } else if (c == '{' || c == '[') {
      stack.push_back(c == '{' ? '}' : ']');
    } else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<json> first_structure(std::string_view s, ValueKind want) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '{' && s[i] != '[') continue;
    if (want == ValueKind::Object && s[i] != '{') continue;
    if (want == ValueKind::Array && s[i] != '[') continue;
    const std::size_t end = balanced_end(s, i);
    if (end == std::string_view::npos) continue;
    json parsed = json::parse(s.substr(i, end - i), nullptr, false, /*ignore_comments=*/true);
    if (!parsed.is_discarded()) return parsed;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Fence> find_fences(std::string_view text) {
  std::vector<Fence> out;
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    Fence f;
    f.begin = pos;
    std::size_t i = pos + 3;
    while (i < text.size() && text[i] == '`') ++i;
    std::size_t tag_end = i;
    while (tag_end < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[tag_end])) || text[tag_end] == '_' ||
            text[tag_end] == '-' || text[tag_end] == '+'))
      ++tag_end;
    const std::string tag(text.substr(i, tag_end - i));
    const bool at_eol = tag_end >= text.size() || text[tag_end] == '\n' || text[tag_end] == '\r';
    if (!tag.empty() && (at_eol || kKnownLangs.count(util::to_lower(tag)))) {
      f.lang = util::to_lower(tag);
      i = tag_end;
    }
    const std::size_t close = text.find("```", i);
    if (close == std::string_view::npos) {
      f.body = util::trim(text.substr(i));
      f.end = text.size();
      f.closed = false;
      out.push_back(std::move(f));
      break;
    }
    f.body = util::trim(text.substr(i, close - i));
    f.end = close + 3;
    while (f.end < text.size() && text[f.end] == '`') ++f.end;
    pos = f.end;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::string> fenced_blocks(std::string_view text) {
  std::vector<std::string> out;
  for (auto& f : find_fences(text)) out.push_back(std::move(f.body));
  return out;
}

std::string strip_fence(std::string_view text) {
  const std::string t = util::trim(text);
  const auto fences = find_fences(t);
  if (fences.size() == 1 && fences[0].begin == 0 && (fences[0].end == t.size()))
    return fences[0].body;
  return t;
}

void validate_shape(const json& value, const Shape& shape, const std::string& path) {
  if (!kind_matches(value, shape.kind))
    throw SchemaViolationError(path, "expected " + std::string(kind_name(shape.kind)) + ", got " +
                                         value.type_name());
  if (shape.kind == ValueKind::Object) {
    for (const auto& f : shape.fields) {
      auto it = value.find(f.key);
      if (it == value.end()) throw SchemaViolationError(path + "." + f.key, "missing key");
      validate_shape(*it, f.shape, path + "." + f.key);
    }
  } else if (shape.kind == ValueKind::Array) {
    if (value.size() < shape.min_items)
      throw SchemaViolationError(path, "expected at least " + std::to_string(shape.min_items) +
                                           " items, got " + std::to_string(value.size()));
    if (shape.element) {
      for (std::size_t i = 0; i < value.size(); ++i)
        validate_shape(value[i], *shape.element, path + "[" + std::to_string(i) + "]");
    }
  }
}

json extract_structured(std::string_view raw, const Shape& shape) {
  std::vector<std::string> sources = fenced_blocks(raw);
  sources.emplace_back(raw);

  for (const auto& src : sources) {
    if (auto parsed = first_structure(src, shape.kind)) {
      validate_shape(*parsed, shape);
      return *parsed;
    }
  }
  throw NoParsableObjectError(std::string(raw));
}

}  // namespace aegis::llm
