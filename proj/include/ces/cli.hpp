// Copyright 2026 The CES Toolkit Authors.
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ces::cli {

/// Runs the command line `args` (program name excluded). Reports go to
/// `out`; failures are written to `err` as one JSON line
/// {"error": {"code", "kind", "message"}}.
///
/// Returns 0 on success, 1 for usage errors, 2 for invalid data and 3 for
/// unmet preconditions.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace ces::cli
