// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cli.hpp"

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // Per-step tapes free megabytes at a time; without this glibc hands the
    // pages back and faults them in again on the next step.
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
#endif
    return rkd::cli::run(argc, argv, std::cout, std::cerr);
}
