# pixel_eql/__main__.py

from pixel_eql.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
