#include <catch2/catch_amalgamated.hpp>
TEST_CASE("test_io_cli placeholder") { SUCCEED(); }
