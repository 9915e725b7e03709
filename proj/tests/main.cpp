#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#ifndef GCF_TEST_DATA_DIR
#error "build must define GCF_TEST_DATA_DIR"
#endif

namespace gcf::testutil {

std::string data_path(const std::string& name) {
    return std::string(GCF_TEST_DATA_DIR) + "/" + name;
}

}  // namespace gcf::testutil
