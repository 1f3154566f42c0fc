#include "toolgate/json.hpp"

#include <cmath>
#include <cstdio>

namespace toolgate {
namespace {

void write_value(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::null:
    case Json::value_t::discarded:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += value.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(value.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(value.get<std::uint64_t>());
      break;
    case Json::value_t::number_float:
      out += format_fixed6(value.get<double>());
      break;
    case Json::value_t::string:
      out += value.dump(-1, ' ', false, Json::error_handler_t::replace);
      break;
    case Json::value_t::binary:
      out += "null";
      break;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += ',';
        first = false;
        write_value(item, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump(-1, ' ', false, Json::error_handler_t::replace);
        out += ':';
        write_value(item, out);
      }
      out += '}';
      break;
    }
  }
}

}  // namespace

std::string format_fixed6(double value) {
  if (!std::isfinite(value)) return "null";
  if (value == 0.0) value = 0.0;  // folds -0.0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string text = buf;
  if (text == "-0.000000") text = "0.000000";
  return text;
}

std::string canonical_dump(const Json& value) {
  std::string out;
  write_value(value, out);
  return out;
}

}  // namespace toolgate
