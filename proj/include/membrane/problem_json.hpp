#pragma once

#include <string>

#include "json.hpp"
#include "membrane/problem.hpp"

namespace membrane {

inline constexpr int kProblemSchemaVersion = 1;

// Parse errors throw Error(InvalidInput) with the dotted path of the offending key.
Problem problem_from_json(const nlohmann::json& j);
Problem problem_from_json_text(const std::string& text);
nlohmann::json problem_to_json(const Problem& p);

InitialFunction initial_function_from_json(const nlohmann::json& j, const std::string& path = "phi");
nlohmann::json initial_function_to_json(const InitialFunction& f);

CoefficientField coefficient_from_json(const nlohmann::json& j, const std::string& path);
TimeFunction time_function_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json validation_report_to_json(const ValidationReport& r);

}  // namespace membrane
