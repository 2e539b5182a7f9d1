from flowmat.cli import main

main()
