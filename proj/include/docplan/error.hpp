#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace docplan {

/// Error raised by any docplan module.
///
/// `kind()` is a stable machine-readable name (e.g. "DuplicateToolId"),
/// `module()` names the module that raised it. Structured payloads such as
/// leakage violations or parse positions travel in `details()`.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& message,
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message),
        module_(std::move(module)),
        kind_(std::move(kind)),
        details_(std::move(details)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& kind() const noexcept { return kind_; }
  const nlohmann::json& details() const noexcept { return details_; }

  nlohmann::json to_json() const {
    return {{"module", module_}, {"kind", kind_}, {"message", what()}, {"details", details_}};
  }

 private:
  std::string module_;
  std::string kind_;
  nlohmann::json details_;
};

}  // namespace docplan
