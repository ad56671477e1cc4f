#include "momeq/studies/commands.hpp"

int main(int argc, char** argv) { return momeq::studies::run_cli(argc, argv); }
