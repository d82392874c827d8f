#pragma once

#include <string>

#include "json.hpp"

#include "ehrlab/certify.hpp"
#include "ehrlab/flow.hpp"
#include "ehrlab/semigroup.hpp"

namespace ehrlab {

using Json = nlohmann::ordered_json;

// Non-finite doubles become the strings "inf", "-inf", "nan".
Json num(double v);
double num_from(const Json& j);

Json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);

Json to_json(const CorrelationModel& m);
Json to_json(const JSpec& s);
JSpec jspec_from_json(const Json& j);

Json to_json(const ScanDomain& d);
ScanDomain scan_domain_from_json(const Json& j);

Json to_json(const ScanReport& r);
Json to_json(const MinRResult& r);
Json to_json(const TraceResult& r);

std::string dump(const Json& j);

}  // namespace ehrlab
