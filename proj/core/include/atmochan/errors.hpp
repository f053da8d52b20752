// SPDX-License-Identifier: Apache-2.0
//
// atmochan: transmittance statistics of atmospheric quantum channels
// Copyright (C) 2026 The atmochan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace atmochan {

// Invalid argument to a numerical routine (negative radius, NaN input, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Unphysical or non-factorizable statistics (non-PSD covariance, log of a
// non-positive moment ratio).
class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The channel transmits nothing (extinction underflow).
class DegenerateChannelError : public StatisticsError {
public:
    using StatisticsError::StatisticsError;
};

// Postselection threshold discards every sample.
class EmptySelectionError : public StatisticsError {
public:
    using StatisticsError::StatisticsError;
};

// Fit ran out of objective evaluations before the coarse grid completed.
class BudgetExhaustedError : public std::runtime_error {
public:
    BudgetExhaustedError(const std::string &what, double completed_fraction)
        : std::runtime_error(what), completed_fraction_(completed_fraction) {}

    double completed_fraction() const noexcept { return completed_fraction_; }

private:
    double completed_fraction_;
};

} // namespace atmochan
