#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "caldet/quillen.hpp"
#include "caldet/reldet.hpp"
#include "caldet/zeta_oracle.hpp"

namespace caldet {

using Json = nlohmann::ordered_json;

// deterministic double / complex encoding used everywhere in reports
std::string format_double(double v);
Json json_complex(Complex z);

Json report_json(const DeterminantReport& report, const std::string& scenario_name);
Json report_json(const MetricRatioReport& report, const std::string& scenario_name);
Json report_json(const CurvatureReport& report, const std::string& scenario_name);
Json report_json(const SpectrumWindow& window, const std::string& scenario_name);
Json report_json(const ContourReport& report, const std::string& scenario_name);

// (|lambda|, Re log, Im log) triples
std::string curve_csv(const LogCurve& curve);
// (index, eigenvalue, multiplicity)
std::string spectrum_csv(const SpectrumWindow& window);
// (x, y, log_canonical_P1, log_canonical_P2, log_quillen_P1, log_quillen_P2,
//  curv_diff_zeta, curv_diff_canonical); stencil columns empty on the border
std::string grid_csv(const CurvatureReport& report);

void write_file(const std::string& path, const std::string& contents);
std::string dump_json(const Json& j);

}  // namespace caldet
