#include "foodsem/cli.hpp"

int main(int argc, char** argv) { return foodsem::run_cli(argc, argv); }
