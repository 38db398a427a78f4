#include "isocal/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isocal/error.hpp"

namespace isocal {

namespace {

void put_array(std::ostream& out, const std::vector<double>& xs) {
  out << '[';
  char buf[32];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", xs[i]);
    out << (i ? ", " : "") << buf;
  }
  out << ']';
}

}  // namespace

void write_model(const CalibratedForecaster& cf, std::ostream& out) {
  out << "{\n"
      << "  \"version\": 1,\n"
      << "  \"scope\": \"" << (cf.scope() == Scope::pooled ? "pooled" : "per_cell") << "\",\n"
      << "  \"h\": " << cf.h() << ",\n"
      << "  \"w\": " << cf.w() << ",\n"
      << "  \"interpolation\": \""
      << (cf.interpolation() == Interpolation::linear ? "linear" : "step") << "\",\n"
      << "  \"maps\": [";
  const auto& maps = cf.maps();
  for (std::size_t i = 0; i < maps.size(); ++i) {
    out << (i ? ",\n    " : "\n    ") << "{\"breakpoints\": ";
    put_array(out, maps[i].breakpoints());
    out << ", \"values\": ";
    put_array(out, maps[i].values());
    out << '}';
  }
  out << "\n  ]\n}\n";
}

std::string model_to_json(const CalibratedForecaster& cf) {
  std::ostringstream out;
  write_model(cf, out);
  return out.str();
}

void write_model(const CalibratedForecaster& cf, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open file for writing");
  write_model(cf, out);
}

CalibratedForecaster parse_model(std::istream& in, const std::string& name) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(name, 0, std::string("invalid model JSON: ") + e.what());
  }

  try {
    if (doc.at("version").get<int>() != 1) throw ParseError(name, 0, "unsupported model version");

    const std::string scope_name = doc.at("scope").get<std::string>();
    Scope scope;
    if (scope_name == "pooled") {
      scope = Scope::pooled;
    } else if (scope_name == "per_cell") {
      scope = Scope::per_cell;
    } else {
      throw ParseError(name, 0, "unknown scope '" + scope_name + "'");
    }

    const std::string interp_name = doc.at("interpolation").get<std::string>();
    Interpolation mode;
    if (interp_name == "linear") {
      mode = Interpolation::linear;
    } else if (interp_name == "step") {
      mode = Interpolation::step;
    } else {
      throw ParseError(name, 0, "unknown interpolation '" + interp_name + "'");
    }

    std::vector<IsotonicMap> maps;
    for (const json& m : doc.at("maps")) {
      maps.emplace_back(m.at("breakpoints").get<std::vector<double>>(),
                        m.at("values").get<std::vector<double>>(), mode);
    }
    const auto h = doc.at("h").get<std::size_t>();
    const auto w = doc.at("w").get<std::size_t>();
    return CalibratedForecaster(scope, h, w, std::move(maps));
  } catch (const json::exception& e) {
    throw ParseError(name, 0, std::string("model schema violation: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(name, 0, std::string("invalid model: ") + e.what());
  }
}

CalibratedForecaster read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_model(in, path.string());
}

}  // namespace isocal
