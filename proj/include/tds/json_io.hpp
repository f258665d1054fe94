#pragma once

#include <json.hpp>
#include <string>

#include "tds/frequency.hpp"
#include "tds/model.hpp"
#include "tds/pid.hpp"
#include "tds/simulate.hpp"
#include "tds/stability.hpp"

namespace tds {

using Json = nlohmann::json;

/// Model object: {"kind": "tf" | "ss" | "dde", ...}.  See FORMATS.md for the
/// exact field layout.  Malformed JSON raises ModelError.
GltiModel model_from_json(const Json& j);
Json model_to_json(const GltiModel& m);

GltiModel load_model(const std::string& path);
void save_model(const GltiModel& m, const std::string& path);

/// Netlist object {"blocks": [...], "sums": [...], "from": [...], "to": [...]}
/// built with connect().
GltiModel netlist_from_json(const Json& j);
GltiModel load_netlist(const std::string& path);

Json to_json(const MarginReport& r);
Json to_json(const TuneReport& r);
Json to_json(const StepMetrics& m);
Json to_json(const SpectrumResult& r);
Json to_json(const DcGain& g);

/// Parses a JSON file; parse failures raise ModelError.
Json load_json(const std::string& path);
void save_json(const Json& j, const std::string& path);

}  // namespace tds
