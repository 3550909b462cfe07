#include <istream>
#include <ostream>

#include <json.hpp>

#include "pml/errors.hpp"
#include "pml/estimator.hpp"

namespace pml::estimator {

void write_moments_json(std::span<const MomentEstimate> moments, std::ostream& out,
                        const std::string& command, std::optional<std::uint64_t> seed) {
  nlohmann::ordered_json doc;
  doc["pml_moments"] = 1;
  if (!command.empty()) doc["command"] = command;
  if (seed) doc["seed"] = *seed;
  auto& rows = doc["moments"] = nlohmann::ordered_json::array();
  for (const MomentEstimate& m : moments) {
    rows.push_back({{"l", m.l},
                    {"s", m.s},
                    {"re", m.value.real()},
                    {"im", m.value.imag()},
                    {"stderr_re", m.stderr_re},
                    {"stderr_im", m.stderr_im},
                    {"n_samples", m.n_samples}});
  }
  out << doc.dump(2) << '\n';
}

MomentsDocument read_moments_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("moments file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("pml_moments", 0) != 1 || !doc.contains("moments") ||
      !doc["moments"].is_array()) {
    throw ParseError(0, "not a pml_moments v1 document");
  }
  MomentsDocument out;
  try {
    if (doc.contains("command")) out.command = doc["command"].get<std::string>();
    if (doc.contains("seed")) out.seed = doc["seed"].get<std::uint64_t>();
    for (const auto& row : doc["moments"]) {
      MomentEstimate m;
      m.l = row.at("l").get<int>();
      m.s = row.at("s").get<double>();
      m.value = {row.at("re").get<double>(), row.at("im").get<double>()};
      m.stderr_re = row.at("stderr_re").get<double>();
      m.stderr_im = row.at("stderr_im").get<double>();
      m.n_samples = row.at("n_samples").get<std::size_t>();
      out.moments.push_back(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed moment record: ") + e.what());
  }
  return out;
}

}  // namespace pml::estimator
