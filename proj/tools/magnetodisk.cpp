#include "magnetodisk/cli.hpp"

int main(int argc, char** argv)
{
    return magnetodisk::cli::run(argc, argv);
}
