#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mbm/drivers.hpp"
#include "mbm/experiments.hpp"
#include "mbm/theory.hpp"

namespace mbm {

using Json = nlohmann::ordered_json;

/// printf("%.17g"); non-finite values become "nan", "inf" or "-inf".
std::string format_number(double x);

/// Serializes with every floating-point number in %.17g (non-finite as null)
/// and two-space indentation.
std::string dump_json(const Json& value);

Json to_json(const RateExponents& r);
Json to_json(const RateReport& r);
Json to_json(const BoundednessReport& r);
Json to_json(const IntegralLemmaReport& r);
Json to_json(const ValidationReport& r);

/// Header `n,mean,stderr,normalized`.
std::string errors_csv(const RateReport& r);
/// Header `t,x`.
std::string path_csv(const SamplePath& path);

/// Creates parent directories as needed; std::runtime_error on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace mbm
