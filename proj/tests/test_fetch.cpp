#include <doctest.h>

#include <filesystem>

#include "depriv/acs.hpp"
#include "depriv/types.hpp"
#include "test_paths.hpp"
#include "test_support.hpp"

using namespace depriv;

namespace {

// ACS-style array-of-arrays payload: header then rows, geography columns last.
const char* kPayload = R"([
  ["B17021_001E","state","county","tract","block group"],
  ["1234","26","163","512100","1"],
  ["567","26","163","512100","2"]
])";

acs::FetchOptions base_options(acs::HttpGet http) {
  acs::FetchOptions opts;
  opts.endpoint = "http://acs.test/data/2019/acs/acs5";
  opts.variable_ids = {"B17021_001E"};
  opts.state_fips = {"26"};
  opts.out_dir = DEPRIV_WORK_DIR "/fetch_test";
  opts.http = std::move(http);
  opts.sleep = [](int) {};  // no real sleeping in tests
  return opts;
}

}  // namespace

TEST_CASE("fetch writes one csv per state with a synthesized geoid") {
  int calls = 0;
  auto opts = base_options([&](const std::string& url) -> std::optional<acs::HttpResponse> {
    ++calls;
    CHECK(url.find("get=B17021_001E") != std::string::npos);
    CHECK(url.find("for=block%20group:*") != std::string::npos);
    CHECK(url.find("in=state:26") != std::string::npos);
    return acs::HttpResponse{200, kPayload};
  });
  const auto written = acs::fetch_acs(opts);
  REQUIRE(written.size() == 1);
  CHECK(calls == 1);
  const auto text = test_support::read_file(written[0]);
  CHECK(text == "GEOID,B17021_001E\n261635121001,1234\n261635121002,567\n");
}

TEST_CASE("server errors retry with backoff, then succeed") {
  int calls = 0;
  std::vector<int> slept;
  auto opts = base_options([&](const std::string&) -> std::optional<acs::HttpResponse> {
    ++calls;
    if (calls <= 2) return acs::HttpResponse{500, "boom"};
    return acs::HttpResponse{200, kPayload};
  });
  opts.sleep = [&](int ms) { slept.push_back(ms); };
  const auto written = acs::fetch_acs(opts);
  CHECK(calls == 3);
  REQUIRE(slept.size() == 2);
  CHECK(slept[1] == 2 * slept[0]);  // exponential backoff
  CHECK(written.size() == 1);
}

TEST_CASE("exhausted retries are a fatal network error") {
  int calls = 0;
  auto opts = base_options([&](const std::string&) -> std::optional<acs::HttpResponse> {
    ++calls;
    return acs::HttpResponse{503, "unavailable"};
  });
  try {
    acs::fetch_acs(opts);
    FAIL("expected NETWORK error");
  } catch (const DeprivError& e) {
    CHECK(e.family() == ErrorFamily::Network);
    CHECK(e.code() == "NETWORK");
  }
  CHECK(calls == 3);
}

TEST_CASE("transport failures count as retryable") {
  int calls = 0;
  auto opts = base_options([&](const std::string&) -> std::optional<acs::HttpResponse> {
    ++calls;
    if (calls < 3) return std::nullopt;  // timeout / connect error
    return acs::HttpResponse{200, kPayload};
  });
  CHECK(acs::fetch_acs(opts).size() == 1);
  CHECK(calls == 3);
}

TEST_CASE("client errors are fatal immediately and carry the body") {
  int calls = 0;
  auto opts = base_options([&](const std::string&) -> std::optional<acs::HttpResponse> {
    ++calls;
    return acs::HttpResponse{404, "no such table"};
  });
  try {
    acs::fetch_acs(opts);
    FAIL("expected HTTP_404");
  } catch (const DeprivError& e) {
    CHECK(e.code() == "HTTP_404");
    CHECK(std::string(e.what()).find("no such table") != std::string::npos);
  }
  CHECK(calls == 1);  // no retry on 4xx
}

TEST_CASE("refetch overwrites the previous file") {
  auto opts = base_options([](const std::string&) -> std::optional<acs::HttpResponse> {
    return acs::HttpResponse{200, kPayload};
  });
  const auto first = acs::fetch_acs(opts);
  const auto before = test_support::read_file(first[0]);
  const auto second = acs::fetch_acs(opts);
  CHECK(first == second);
  CHECK(test_support::read_file(second[0]) == before);
}

TEST_CASE("malformed payloads are rejected") {
  auto opts = base_options([](const std::string&) -> std::optional<acs::HttpResponse> {
    return acs::HttpResponse{200, "not json"};
  });
  CHECK_THROWS_AS(acs::fetch_acs(opts), DeprivError);

  CHECK_THROWS_AS(acs::acs_json_to_csv("[]", {"X"}), DeprivError);
  CHECK_THROWS_AS(
      acs::acs_json_to_csv(R"([["state","county","tract","block group"]])", {"X"}),
      DeprivError);
}
