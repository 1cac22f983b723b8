#include "limitql/io.hpp"

int main(int argc, char** argv) { return limitql::run_cli(argc, argv); }
