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

namespace ces::stats {

double NormalCdf(double x);
double NormalPdf(double x);

/// P(K > lambda) for the Kolmogorov distribution,
/// 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2).
double KolmogorovSurvival(double lambda);

/// CDF of the range of k i.i.d. standard normals (studentized range with
/// infinite degrees of freedom).
double NormalRangeCdf(double q, int k);

/// Upper-alpha quantile of the normal range for k groups.
double NormalRangeQuantile(double alpha, int k);

}  // namespace ces::stats
