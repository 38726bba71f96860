from smalldev.cli import main

main()
