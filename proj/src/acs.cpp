#include "depriv/acs.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "depriv/csv.hpp"
#include "depriv/types.hpp"

namespace depriv::acs {

namespace {

using nlohmann::json;

std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '*' ||
        c == ':' || c == ',') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

std::optional<HttpResponse> httplib_get(const std::string& url) {
  const auto path_pos = url.find('/', url.find("://") + 3);
  const std::string base = path_pos == std::string::npos ? url : url.substr(0, path_pos);
  const std::string path = path_pos == std::string::npos ? "/" : url.substr(path_pos);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base.starts_with("https://")) {
    throw DeprivError(ErrorFamily::Network, "NO_TLS",
                      "built without TLS support; use an http endpoint or rebuild");
  }
#endif
  httplib::Client client(base);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res) return std::nullopt;
  return HttpResponse{res->status, res->body};
}

std::string join_list(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string acs_json_to_csv(const std::string& json_body,
                            const std::vector<std::string>& variable_ids) {
  json rows;
  try {
    rows = json::parse(json_body);
  } catch (const json::parse_error& e) {
    throw DeprivError(ErrorFamily::Network, "BAD_RESPONSE",
                      std::string("ACS response is not JSON: ") + e.what());
  }
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw DeprivError(ErrorFamily::Network, "BAD_RESPONSE",
                      "ACS response is not an array of rows");
  }

  const auto& header = rows[0];
  auto col_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i].is_string() && header[i].get<std::string>() == name) return i;
    }
    throw DeprivError(ErrorFamily::Network, "BAD_RESPONSE",
                      "ACS response lacks column: " + name);
  };

  const std::size_t c_state = col_of("state");
  const std::size_t c_county = col_of("county");
  const std::size_t c_tract = col_of("tract");
  const std::size_t c_bg = col_of("block group");
  std::vector<std::size_t> var_cols;
  var_cols.reserve(variable_ids.size());
  for (const auto& v : variable_ids) var_cols.push_back(col_of(v));

  std::string csv_text = "GEOID";
  for (const auto& v : variable_ids) csv_text += "," + csv::escape(v);
  csv_text += "\n";

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](std::size_t c) -> std::string {
      if (c >= row.size() || row[c].is_null()) return "";
      if (row[c].is_string()) return row[c].get<std::string>();
      return row[c].dump();
    };
    csv_text += cell(c_state) + cell(c_county) + cell(c_tract) + cell(c_bg);
    for (std::size_t c : var_cols) csv_text += "," + csv::escape(cell(c));
    csv_text += "\n";
  }
  return csv_text;
}

std::vector<std::string> fetch_acs(const FetchOptions& opts) {
  if (opts.variable_ids.empty() || opts.state_fips.empty()) {
    throw DeprivError(ErrorFamily::Config, "BAD_FETCH",
                      "fetch needs at least one variable and one state");
  }
  HttpGet get = opts.http ? opts.http : httplib_get;
  Sleeper sleep = opts.sleep ? opts.sleep : [](int ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  };

  std::filesystem::create_directories(opts.out_dir);
  std::vector<std::string> written;

  for (const auto& fips : opts.state_fips) {
    const std::string url = opts.endpoint + "?get=" +
                            url_encode(join_list(opts.variable_ids, ",")) +
                            "&for=" + url_encode("block group:*") +
                            "&in=" + url_encode("state:" + fips) + "%20" +
                            url_encode("county:*");

    std::optional<HttpResponse> response;
    for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
      auto res = get(url);
      if (res && res->status >= 200 && res->status < 300) {
        response = res;
        break;
      }
      if (res && res->status >= 400 && res->status < 500) {
        throw DeprivError(ErrorFamily::Network,
                          "HTTP_" + std::to_string(res->status),
                          "ACS request failed for state " + fips + ": " + res->body);
      }
      // 5xx or transport failure: retry with exponential backoff.
      if (attempt < opts.max_attempts) {
        sleep(opts.backoff_base_ms << (attempt - 1));
      }
    }
    if (!response) {
      throw DeprivError(ErrorFamily::Network, "NETWORK",
                        "ACS request exhausted retries for state " + fips);
    }

    const std::string csv_text = acs_json_to_csv(response->body, opts.variable_ids);
    const std::string path =
        (std::filesystem::path(opts.out_dir) / ("acs_" + fips + ".csv")).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DeprivError(ErrorFamily::Io, "UNWRITABLE_FILE", "cannot write " + path);
    out << csv_text;
    written.push_back(path);
  }
  return written;
}

}  // namespace depriv::acs
