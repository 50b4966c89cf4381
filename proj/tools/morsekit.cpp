#include "morsekit/commands.hpp"

int main(int argc, char** argv) { return morsekit::run_cli(argc, argv); }
