#pragma once

#include <stdexcept>
#include <string>

namespace bandit {

struct unknown_arm : std::runtime_error {
    explicit unknown_arm(const std::string& what) : std::runtime_error(what) {}
};

struct unbounded_functional : std::runtime_error {
    explicit unbounded_functional(const std::string& what) : std::runtime_error(what) {}
};

struct missing_assumption : std::runtime_error {
    explicit missing_assumption(const std::string& what) : std::runtime_error(what) {}
};

struct eps_too_large : std::runtime_error {
    explicit eps_too_large(const std::string& what) : std::runtime_error(what) {}
};

struct grid_too_coarse : std::runtime_error {
    explicit grid_too_coarse(const std::string& what) : std::runtime_error(what) {}
};

struct misaligned_grids : std::runtime_error {
    explicit misaligned_grids(const std::string& what) : std::runtime_error(what) {}
};

struct empty_input : std::runtime_error {
    explicit empty_input(const std::string& what) : std::runtime_error(what) {}
};

struct too_few_points : std::runtime_error {
    explicit too_few_points(const std::string& what) : std::runtime_error(what) {}
};

struct singular_system : std::runtime_error {
    explicit singular_system(const std::string& what) : std::runtime_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// raised when the elimination run ends with an empty selected set, which the
// algorithm's tie handling should make impossible
struct estimator_error : std::runtime_error {
    explicit estimator_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bandit
