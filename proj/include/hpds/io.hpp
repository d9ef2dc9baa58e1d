#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "hpds/analysis.hpp"
#include "hpds/hpds_model.hpp"
#include "hpds/sysid.hpp"

namespace hpds::io {

using Json = nlohmann::ordered_json;

// Deterministic rendering: insertion-ordered keys, two-space indent, scalar
// arrays on one line, doubles as %.17g. Non-finite numbers throw NumericError.
std::string dump(const Json& j);
// Throws ArgumentError with the parser message on malformed input.
Json parse(const std::string& text);

Json to_json(const Tensor& t);
Json to_json(const Matrix& m);
Json to_json(const TensorTrain& tt);
Json to_json(const HTucker& h);
Json to_json(const HpdsModel& m);
Json to_json(const IdentifiabilityReport& r);

Tensor tensor_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);
TensorTrain tt_from_json(const Json& j);
HTucker ht_from_json(const Json& j);
HpdsModel model_from_json(const Json& j);

std::string read_file(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);

// Trajectory CSV: t,x1..xn[,dx1..dxn][,u1..um][,y1..yl]. For continuous
// samples dx is X1; for discrete samples dx is (X1 - X0) / tau.
std::string trajectory_csv(const SampleSet& s, bool discrete);

struct Trajectory {
  Vector t;
  Matrix x;  // n x T
  std::optional<Matrix> dx;
  std::optional<Matrix> u;
  std::optional<Matrix> y;
};

Trajectory parse_trajectory_csv(const std::string& text);

// Plain numeric CSV. A first line with any non-numeric field is a header and
// is skipped. Returns rows x cols.
Matrix parse_numeric_csv(const std::string& text);

}  // namespace hpds::io
