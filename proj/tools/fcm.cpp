#include "fcm/cli/commands.hpp"

int main(int argc, char** argv) { return fcm::app::run_cli(argc, argv); }
