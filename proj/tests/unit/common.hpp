// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <doctest.h>

#include <optional>

#include "codeprune/error.hpp"

// Kind of the codeprune::Error thrown by `f`, or nullopt when nothing is thrown.
template <typename F>
std::optional<codeprune::ErrorKind> error_kind_of(F&& f) {
    try {
        f();
    } catch (const codeprune::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

#define CHECK_ERROR(expr, kind) CHECK(error_kind_of([&] { (void)(expr); }) == std::optional(kind))
