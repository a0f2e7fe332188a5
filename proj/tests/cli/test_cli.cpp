// Copyright 2026 The b92-keyrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end tests of the b92_keyrate binary: flag validation, exit codes,
// CSV contract and cross-mode determinism. Budgets are kept tiny; numerical
// quality is the unit and acceptance suites' job.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

struct ToolResult {
  int exit_code = -1;
  std::string out;
};

ToolResult run_tool(const std::string& args) {
  const std::string cmd = std::string(B92_KEYRATE_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  ToolResult result;
  std::array<char, 4096> buffer;
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.out.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  return fields;
}

constexpr char kHeader[] =
    "q,alpha,p_acc,c_match,c_err,h_xy,s_min,key_rate,converged,iterations,min_choi_eig";
constexpr char kFastFlags[] = " --restarts 1 --max-iter 1200 --seed 7";

}  // namespace

TEST_CASE("single mode: header, row shape, exit 0 on convergence") {
  const ToolResult result = run_tool("--mode single --alpha 0.39 --q 0.06" + std::string(kFastFlags));
  CHECK(result.exit_code == 0);
  const auto lines = split_lines(result.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kHeader);
  const auto fields = split_csv(lines[1]);
  REQUIRE(fields.size() == 11);
  CHECK(std::stod(fields[0]) == doctest::Approx(0.06));
  CHECK(std::stod(fields[1]) == doctest::Approx(0.39));
  CHECK(fields[8] == "true");
}

TEST_CASE("single mode: identical rows under a fixed seed") {
  const std::string args = "--mode single --q 0.065" + std::string(kFastFlags);
  const ToolResult first = run_tool(args);
  const ToolResult second = run_tool(args);
  CHECK(first.exit_code == second.exit_code);
  CHECK(first.out == second.out);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_tool("--mode single --q 1.5").exit_code == 1);
  CHECK(run_tool("--mode single").exit_code == 1);
  CHECK(run_tool("--mode single --q 0.05 --alpha 0.8").exit_code == 1);
  CHECK(run_tool("--mode sweep --q-start 0.08 --q-end 0.05").exit_code == 1);
  CHECK(run_tool("--mode sweep --q-start 0.05 --q-end 0.06 --q-step -0.01").exit_code == 1);
  CHECK(run_tool("--no-such-flag").exit_code == 1);
  CHECK(run_tool("--mode bogus").exit_code == 1);
}

TEST_CASE("non-convergence is flagged and exits 2") {
  const ToolResult result = run_tool("--mode single --q 0.06 --restarts 1 --max-iter 1");
  CHECK(result.exit_code == 2);
  const auto lines = split_lines(result.out);
  REQUIRE(lines.size() == 2);
  CHECK(split_csv(lines[1])[8] == "false");

  // Same contract in sweep mode: rows still emitted, each flagged.
  const ToolResult sweep = run_tool(
      "--mode sweep --q-start 0.05 --q-end 0.06 --q-step 0.01 --restarts 1 --max-iter 1");
  CHECK(sweep.exit_code == 2);
  const auto sweep_lines = split_lines(sweep.out);
  REQUIRE(sweep_lines.size() == 3);
  CHECK(split_csv(sweep_lines[1])[8] == "false");
  CHECK(split_csv(sweep_lines[2])[8] == "false");
}

TEST_CASE("sweep: ascending rows satisfying the key-rate identity") {
  const ToolResult result =
      run_tool("--mode sweep --q-start 0.05 --q-end 0.062 --q-step 0.004 --jobs 2" +
               std::string(kFastFlags));
  CHECK(result.exit_code == 0);
  const auto lines = split_lines(result.out);
  REQUIRE(lines.size() == 5);  // header + 4 points
  CHECK(lines[0] == kHeader);
  double prev_q = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv(lines[i]);
    REQUIRE(fields.size() == 11);
    const double q = std::stod(fields[0]);
    CHECK(q > prev_q);
    prev_q = q;
    // CSV round trip: the reparsed fields still satisfy the defining identity.
    const double p_acc = std::stod(fields[2]);
    const double h_xy = std::stod(fields[5]);
    const double s_min = std::stod(fields[6]);
    const double rate = std::stod(fields[7]);
    CHECK(std::abs(rate - (s_min / p_acc - h_xy)) < 1e-9);
  }
}

TEST_CASE("sweep: --jobs does not change the rows") {
  const std::string base =
      "--mode sweep --q-start 0.05 --q-end 0.062 --q-step 0.006" + std::string(kFastFlags);
  const ToolResult serial = run_tool(base + " --jobs 1");
  const ToolResult parallel = run_tool(base + " --jobs 4");
  CHECK(serial.exit_code == parallel.exit_code);
  CHECK(serial.out == parallel.out);
}

TEST_CASE("alpha-sweep: rows per alpha, consistent with single mode") {
  const ToolResult sweep =
      run_tool("--mode alpha-sweep --q 0.05 --alpha-start 0.3 --alpha-end 0.48 "
               "--alpha-step 0.09" +
               std::string(kFastFlags));
  CHECK(sweep.exit_code == 0);
  const auto lines = split_lines(sweep.out);
  REQUIRE(lines.size() == 4);  // header + alpha in {0.30, 0.39, 0.48}

  const ToolResult single = run_tool("--mode single --alpha 0.39 --q 0.05" +
                                     std::string(kFastFlags));
  const auto single_lines = split_lines(single.out);
  REQUIRE(single_lines.size() == 2);
  CHECK(lines[2] == single_lines[1]);  // identical (alpha, q, seed) => identical row

  // The best rate over a grid containing 0.39 is at least the 0.39 rate.
  double best_rate = -1e9;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    best_rate = std::max(best_rate, std::stod(split_csv(lines[i])[7]));
  }
  CHECK(best_rate >= std::stod(split_csv(lines[2])[7]) - 1e-9);
}

TEST_CASE("threshold: bracket failure exits 3") {
  const ToolResult result =
      run_tool("--mode threshold --q-start 0.0 --q-end 0.01 --restarts 1 --max-iter 200");
  CHECK(result.exit_code == 3);
  CHECK(result.out.empty());
}

TEST_CASE("threshold: finds the zero crossing above 0.065") {
  const ToolResult result = run_tool("--mode threshold --q-start 0.065 --q-end 0.12" +
                                     std::string(kFastFlags));
  CHECK(result.exit_code == 0);
  const auto lines = split_lines(result.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] ==
        std::string("alpha,q_lo,q_hi,rate_lo,rate_hi,q_star,optimizer_calls"));
  const auto fields = split_csv(lines[1]);
  REQUIRE(fields.size() == 7);
  const double q_lo = std::stod(fields[1]);
  const double q_hi = std::stod(fields[2]);
  const double q_star = std::stod(fields[5]);
  CHECK(q_hi - q_lo <= 1e-4 + 1e-12);
  CHECK(q_star >= 0.065);
  CHECK(std::stod(fields[3]) > 0.0);
  CHECK(std::stod(fields[4]) < 0.0);
}

TEST_CASE("--output writes the same CSV to a file") {
  const std::string path = "/tmp/b92_cli_test_out.csv";
  std::remove(path.c_str());
  const std::string args = "--mode single --q 0.06" + std::string(kFastFlags);
  const ToolResult direct = run_tool(args);
  const ToolResult filed = run_tool(args + " --output " + path);
  CHECK(filed.exit_code == direct.exit_code);
  CHECK(filed.out.empty());
  FILE* f = fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::string contents;
  std::array<char, 4096> buffer;
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), f)) > 0) {
    contents.append(buffer.data(), got);
  }
  fclose(f);
  std::remove(path.c_str());
  CHECK(contents == direct.out);
}
