// Copyright 2026 The RQE Lab Authors
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

#ifndef RQELAB_CLI_H_
#define RQELAB_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace rqelab {

// Exit codes: 0 success, 1 check failure, 2 usage error.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);
int RunCli(int argc, char** argv);

// "a:b:step" -> inclusive grid.
std::vector<double> ParseGrid(const std::string& text);

}  // namespace rqelab

#endif  // RQELAB_CLI_H_
