#pragma once

// Client for the public ACS 5-year HTTP API. Fetching is separated from
// parsing so the whole test suite runs offline; the transport is injectable
// and tests exercise the retry contract without sockets.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace depriv::acs {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Returns nullopt on transport failure (connect error / timeout).
using HttpGet = std::function<std::optional<HttpResponse>(const std::string& url)>;
using Sleeper = std::function<void(int milliseconds)>;

struct FetchOptions {
  std::string endpoint;  // e.g. https://api.census.gov/data/2019/acs/acs5
  std::vector<std::string> variable_ids;
  std::vector<std::string> state_fips;
  std::string out_dir;
  int max_attempts = 3;       // total attempts per request (5xx / timeout retried)
  int backoff_base_ms = 500;  // doubles per retry

  HttpGet http;    // defaults to the cpp-httplib transport
  Sleeper sleep;   // defaults to a real sleep
};

// Writes one CSV per state (acs_<fips>.csv: GEOID + requested variables at
// block-group granularity). Idempotent: re-fetch overwrites. HTTP 4xx is
// fatal carrying the response body; exhausted retries are fatal NETWORK.
// Returns the paths written.
std::vector<std::string> fetch_acs(const FetchOptions& opts);

// Converts one ACS array-of-arrays JSON payload into CSV text with a
// synthesized 12-digit GEOID column (exposed for tests).
std::string acs_json_to_csv(const std::string& json_body,
                            const std::vector<std::string>& variable_ids);

}  // namespace depriv::acs
