if __name__ == "__main__":
    from gridtree_core.app import main

    main()
