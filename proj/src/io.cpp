#include "occ/io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "occ/errors.hpp"

namespace occ {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ModelFormatError(pointer + ": " + what, 0, 0, pointer);
}

void reject_unknown(const json& obj, const std::string& pointer, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(pointer, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(pointer + "/" + key, "unknown field");
  }
}

const json& field(const json& obj, const std::string& pointer, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(pointer, std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const json& v, const std::string& pointer) {
  if (!v.is_number()) fail(pointer, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& pointer, std::size_t expected) {
  if (!v.is_array()) fail(pointer, "expected an array of numbers");
  if (v.size() != expected) {
    fail(pointer, "expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], pointer + "/" + std::to_string(k)));
  return out;
}

std::vector<FunctionFamily> family_list(const json& doc, const char* key, std::size_t n) {
  const std::string pointer = std::string("/") + key;
  const auto& arr = field(doc, "", key);
  if (!arr.is_array()) fail(pointer, "expected an array of function entries");
  if (arr.size() != n) fail(pointer, "expected n = " + std::to_string(n) + " entries, found " + std::to_string(arr.size()));
  std::vector<FunctionFamily> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(parse_family(arr[i], n, pointer + "/" + std::to_string(i)));
  return out;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

ordered_json vector_json(const std::vector<double>& v) {
  ordered_json out = ordered_json::array();
  for (double x : v) out.push_back(x);
  return out;
}

ordered_json subset_json(Word a) {
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < 64; ++i)
    if (test_bit(a, i)) out.push_back(i + 1);
  return out;
}

ordered_json universe_json(const Universe& u) {
  ordered_json out;
  out["n"] = u.n;
  out["horizon"] = u.horizon;
  out["instances"] = u.instances;
  out["coverage"] = u.coverage;
  out["description"] = u.description;
  return out;
}

ordered_json witness_json(const Witness& w) {
  ordered_json out = ordered_json::object();
  if (w.site) out["site"] = *w.site + 1;
  if (w.time) out["time"] = *w.time;
  if (w.subset) out["subset"] = subset_json(*w.subset);
  if (!w.omega.empty()) {
    std::string s;
    for (auto b : w.omega) s.push_back(b ? '1' : '0');
    out["omega"] = s;
  }
  if (w.pattern) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : w.pattern->entries) entries.push_back({{"site", e.site + 1}, {"times", e.times}});
    out["pattern"] = entries;
  }
  out["lhs"] = w.lhs;
  out["rhs"] = w.rhs;
  out["margin"] = w.lhs - w.rhs;
  return out;
}

}  // namespace

FunctionFamily parse_family(const json& entry, std::size_t n, const std::string& pointer) {
  reject_unknown(entry, pointer, {"family", "params", "offset", "slope", "pins"});
  const auto& name = field(entry, pointer, "family");
  if (!name.is_string()) fail(pointer + "/family", "expected a string");
  FamilyKind kind;
  try {
    kind = parse_family_kind(name.get<std::string>());
  } catch (const std::exception& e) {
    fail(pointer + "/family", e.what());
  }
  const std::string pp = pointer + "/params";
  const auto& params = field(entry, pointer, "params");
  try {
    std::optional<FunctionFamily> f;
    switch (kind) {
      case FamilyKind::constant:
        reject_unknown(params, pp, {"value"});
        f = FunctionFamily::constant(n, number(field(params, pp, "value"), pp + "/value"));
        break;
      case FamilyKind::affine_saturated:
        reject_unknown(params, pp, {"intercept", "weights"});
        f = FunctionFamily::affine_saturated(number(field(params, pp, "intercept"), pp + "/intercept"),
                                             numbers(field(params, pp, "weights"), pp + "/weights", n));
        break;
      case FamilyKind::product_form:
        reject_unknown(params, pp, {"beta"});
        f = FunctionFamily::product_form(numbers(field(params, pp, "beta"), pp + "/beta", n));
        break;
      case FamilyKind::hanski_incidence:
        reject_unknown(params, pp, {"weights", "half_saturation"});
        f = FunctionFamily::hanski_incidence(numbers(field(params, pp, "weights"), pp + "/weights", n),
                                             number(field(params, pp, "half_saturation"), pp + "/half_saturation"));
        break;
      case FamilyKind::tabulated_multilinear:
        reject_unknown(params, pp, {"table"});
        if (n > 20) fail(pp + "/table", "tabulated families support n <= 20");
        f = FunctionFamily::tabulated_multilinear(n, numbers(field(params, pp, "table"), pp + "/table", lattice_size(n)));
        break;
    }
    const double offset = entry.contains("offset") ? number(entry["offset"], pointer + "/offset") : 0.0;
    const double slope = entry.contains("slope") ? number(entry["slope"], pointer + "/slope") : 1.0;
    if (offset != 0.0 || slope != 1.0) f = f->with_output(offset, slope);
    if (entry.contains("pins")) {
      const auto& pins = entry["pins"];
      if (!pins.is_array()) fail(pointer + "/pins", "expected an array");
      for (std::size_t k = 0; k < pins.size(); ++k) {
        const std::string pk = pointer + "/pins/" + std::to_string(k);
        reject_unknown(pins[k], pk, {"site", "value"});
        const auto& site = field(pins[k], pk, "site");
        if (!site.is_number_integer() || site.get<long long>() < 1 || site.get<long long>() > static_cast<long long>(n))
          fail(pk + "/site", "expected a site index in 1..n");
        f = f->pinned(site.get<std::size_t>() - 1, number(field(pins[k], pk, "value"), pk + "/value"));
      }
    }
    return *f;
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    fail(pp, e.what());
  }
}

ModelDocument parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ModelFormatError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what(),
                           line, column, "");
  }
  reject_unknown(doc, "", {"n", "colonisation", "survival", "birth", "death", "x0", "description"});
  const auto& nv = field(doc, "", "n");
  if (!nv.is_number_integer() || nv.get<long long>() < 1 || nv.get<long long>() > 64)
    fail("/n", "expected an integer in 1..64");
  const auto n = nv.get<std::size_t>();

  const bool occupancy = doc.contains("colonisation") || doc.contains("survival");
  const bool spin = doc.contains("birth") || doc.contains("death");
  if (occupancy == spin) fail("", "expected either colonisation/survival or birth/death");

  ModelDocument out;
  try {
    if (occupancy) {
      out.kind = ModelKind::occupancy;
      out.occupancy.emplace(family_list(doc, "colonisation", n), family_list(doc, "survival", n));
    } else {
      out.kind = ModelKind::spin;
      out.spin.emplace(family_list(doc, "birth", n), family_list(doc, "death", n));
    }
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    fail("", e.what());
  }
  if (doc.contains("x0")) {
    const auto& x0 = doc["x0"];
    if (!x0.is_string()) fail("/x0", "expected a bit string");
    try {
      out.x0 = BitState::parse(x0.get<std::string>());
    } catch (const std::exception& e) {
      fail("/x0", e.what());
    }
    if (out.x0->size() != n) fail("/x0", "expected " + std::to_string(n) + " bits");
  }
  if (doc.contains("description")) {
    if (!doc["description"].is_string()) fail("/description", "expected a string");
    out.description = doc["description"].get<std::string>();
  }
  return out;
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot read model file " + path, 0, 0, "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

ordered_json family_to_json(const FunctionFamily& f) {
  ordered_json out;
  out["family"] = std::string(to_string(f.kind()));
  out["params"] = std::visit(
      [](const auto& s) -> ordered_json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FunctionFamily::Constant>) {
          return {{"value", s.value}};
        } else if constexpr (std::is_same_v<S, FunctionFamily::AffineSaturated>) {
          return {{"intercept", s.intercept}, {"weights", vector_json(s.weights)}};
        } else if constexpr (std::is_same_v<S, FunctionFamily::ProductForm>) {
          return {{"beta", vector_json(s.beta)}};
        } else if constexpr (std::is_same_v<S, FunctionFamily::HanskiIncidence>) {
          return {{"weights", vector_json(s.weights)}, {"half_saturation", s.half_saturation}};
        } else {
          return {{"table", vector_json(s.table)}};
        }
      },
      f.shape());
  if (f.offset() != 0.0) out["offset"] = f.offset();
  if (f.slope() != 1.0) out["slope"] = f.slope();
  if (!f.pins().empty()) {
    ordered_json pins = ordered_json::array();
    for (const auto& [coord, value] : f.pins()) pins.push_back({{"site", coord + 1}, {"value", value}});
    out["pins"] = pins;
  }
  return out;
}

ordered_json model_to_json(const ModelDocument& doc) {
  ordered_json out;
  out["n"] = doc.n();
  auto list = [](const std::vector<FunctionFamily>& fs) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : fs) arr.push_back(family_to_json(f));
    return arr;
  };
  if (doc.occupancy) {
    out["colonisation"] = list(doc.occupancy->colonisation());
    out["survival"] = list(doc.occupancy->survival());
  } else {
    out["birth"] = list(doc.spin->birth());
    out["death"] = list(doc.spin->death());
  }
  if (doc.x0) out["x0"] = doc.x0->to_string();
  if (!doc.description.empty()) out["description"] = doc.description;
  return out;
}

ordered_json to_json(const AssumptionReport& report) {
  ordered_json out;
  out["check"] = "assumptions";
  out["verdict"] = std::string(to_string(report.overall()));
  out["samples"] = report.samples;
  out["tol"] = report.tol;
  out["seed"] = report.seed;
  ordered_json results = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json e;
    e["hypothesis"] = std::string(to_string(r.hypothesis));
    e["site"] = r.site + 1;
    e["verdict"] = std::string(to_string(r.verdict));
    e["worst_margin"] = r.worst_margin;
    e["instances"] = r.instances;
    if (r.hypothesis == Hypothesis::birth_lipschitz || r.hypothesis == Hypothesis::death_lipschitz)
      e["estimate"] = r.estimate;
    if (r.verdict != Verdict::pass) e["witness"] = {{"x", vector_json(r.witness_x)}, {"y", vector_json(r.witness_y)}};
    results.push_back(e);
  }
  out["results"] = results;
  return out;
}

ordered_json to_json(const OrderReport& report) {
  ordered_json out;
  out["check"] = report.check;
  out["universe"] = universe_json(report.universe);
  out["worst_margin"] = report.worst_margin;
  out["witness"] = witness_json(report.witness);
  out["verdict"] = std::string(to_string(report.verdict));
  out["hypotheses_certified"] = report.hypotheses_certified;
  out["tol"] = report.tol;
  return out;
}

ordered_json to_json(const DiscretisedOrderingReport& report) {
  ordered_json out;
  out["check"] = "discretised_ordering";
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"delta", r.delta},
                    {"x_probability", r.x_probability},
                    {"w_probability", r.w_probability},
                    {"margin", r.margin},
                    {"worst_site_margin", r.worst_site_margin}});
  }
  out["rows"] = rows;
  out["continuous_margin"] = report.continuous_margin;
  out["worst_margin"] = report.worst_margin;
  out["verdict"] = std::string(to_string(report.verdict()));
  out["hypotheses_certified"] = report.hypotheses_certified;
  out["tol"] = report.tol;
  return out;
}

}  // namespace occ
