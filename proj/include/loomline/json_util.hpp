#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace loomline {

/// Insertion-ordered JSON keeps serialized documents in declaration order.
using Json = nlohmann::ordered_json;

/// Input text that is not well-formed JSON.
class JsonSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses text, rethrowing syntax problems as JsonSyntaxError.
Json parse_json_text(const std::string& text);

/// Writes a document with two-space indentation and a trailing newline.
std::string render_document(const Json& doc);

}  // namespace loomline
