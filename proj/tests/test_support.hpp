#pragma once

#include <filesystem>

#include "isoclock/nuclide_db.hpp"

#ifndef ISOCLOCK_SOURCE_DIR
#define ISOCLOCK_SOURCE_DIR "."
#endif

namespace test_support {

inline std::filesystem::path source_dir() { return ISOCLOCK_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

inline const isoclock::NuclideRegistry& shipped_registry() {
    static const auto reg = isoclock::load_registry_file(data_dir() / "nuclides.dat");
    return reg;
}

}  // namespace test_support
