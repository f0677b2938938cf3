#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "occ/bits.hpp"
#include "occ/bridge.hpp"
#include "occ/model.hpp"
#include "occ/order.hpp"

namespace occ {

/// Malformed or invalid model document. line/column are 1-based, 0 when unknown.
class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(const std::string& message, std::size_t line, std::size_t column, std::string pointer)
      : std::runtime_error(message), line_(line), column_(column), pointer_(std::move(pointer)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  /// JSON pointer to the offending value, empty for syntax errors.
  const std::string& pointer() const { return pointer_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string pointer_;
};

enum class ModelKind { occupancy, spin };

struct ModelDocument {
  ModelKind kind = ModelKind::occupancy;
  std::optional<ModelSpec> occupancy;
  std::optional<SpinSpec> spin;
  /// Optional "x0" bit string; all sites vacant when absent.
  std::optional<BitState> x0;
  std::string description;

  std::size_t n() const { return occupancy ? occupancy->n() : spin->n(); }
  BitState initial_state() const { return x0 ? *x0 : BitState::zeros(n()); }
};

/**
 * Parses a model document.
 *
 *   {"n": 2,
 *    "colonisation": [{"family": "affine-saturated", "params": {"intercept": 0.2, "weights": [0, 0.3]}}, ...],
 *    "survival":     [{"family": "constant", "params": {"value": 0.9}}, ...],
 *    "x0": "00"}
 *
 * Spin models use "birth" and "death" instead. Entries may carry "offset" and
 * "slope" (output map offset + slope * value). Unknown fields are rejected.
 */
ModelDocument parse_model(std::string_view text);
ModelDocument load_model(const std::string& path);

FunctionFamily parse_family(const nlohmann::json& entry, std::size_t n, const std::string& pointer = "");
nlohmann::ordered_json family_to_json(const FunctionFamily& f);
nlohmann::ordered_json model_to_json(const ModelDocument& doc);

nlohmann::ordered_json to_json(const AssumptionReport& report);
nlohmann::ordered_json to_json(const OrderReport& report);
nlohmann::ordered_json to_json(const DiscretisedOrderingReport& report);

}  // namespace occ
