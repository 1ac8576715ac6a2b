// commands.h

// Copyright 2026  The nplda-backend Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NPLDA_TOOLS_COMMANDS_H_
#define NPLDA_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace nplda {

/// Runs the command line `args` (without the program name).  Returns the
/// process exit status: 0 on success, 1 on a runtime error, 2 on a usage
/// error.  Diagnostics go to `err`, results to `out`.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

}  // namespace nplda

#endif  // NPLDA_TOOLS_COMMANDS_H_
