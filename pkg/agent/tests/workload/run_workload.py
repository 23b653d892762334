from uxmini.app import main

if __name__ == "__main__":
    print(main())
