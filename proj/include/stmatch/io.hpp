#pragma once

#include <stmatch/allocation.hpp>
#include <stmatch/oracle.hpp>
#include <stmatch/partition.hpp>
#include <stmatch/policies.hpp>
#include <stmatch/pricing.hpp>
#include <stmatch/solver.hpp>

#include <json.hpp>

#include <string>
#include <string_view>

namespace stmatch {

using Json = nlohmann::json;

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);
std::string read_file(const std::string& path);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

/// %.17g; non-finite values print as inf, -inf or nan.
std::string format_double(double value);

/// Scalar that keeps non-finite values representable in JSON ("inf", "-inf", "nan").
Json json_number(double value);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);

Json to_json(const SolveReport& report);
Json to_json(const MatchingPlan& plan, const Scenario& scenario);
Json to_json(const PricingSchedule& prices);
Json to_json(const SlotSchedule& slots);
Json to_json(const AllocationResult& result);
Json to_json(const PolicyComparison& comparison);
Json to_json(const std::vector<ParityRow>& rows);

/// cell,ix,iy,x,y,type,label with 1-based types and stations, label 0 for unmatched.
std::string plan_cells_csv(const MatchingPlan& plan, const Scenario& scenario);
/// station,type,t0,t1 with type 0 for idle intervals.
std::string schedule_csv(const MatchingPlan& plan);
/// station,t,price at breakpoints.
std::string prices_csv(const PricingSchedule& prices);
/// station,slot,t0,t1,type,price,capacity_mass.
std::string slots_csv(const SlotSchedule& slots);
/// policy,spatial,temporal,total,uncovered_total,uncovered_by_type (semicolon-separated list).
std::string comparison_csv(const PolicyComparison& comparison);

}  // namespace stmatch
