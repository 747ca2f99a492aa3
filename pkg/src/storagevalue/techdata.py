"""2030 storage component data and LCOS assumptions (hydrogen low/high, Li-ion).

Power components in EUR/kW_el, stores in EUR/kWh_el; fractions not percent.
"""
from .core import StorageComponentSpec

DISCOUNT_RATE = 0.07

ELECTROLYSER_LOW = StorageComponentSpec("charger", 339.0, 0.02, 25, 0.68, DISCOUNT_RATE)  # alkaline
ELECTROLYSER_HIGH = StorageComponentSpec("charger", 677.0, 0.03, 15, 0.79, DISCOUNT_RATE)  # solid oxide
FUEL_CELL_LOW = StorageComponentSpec("discharger", 339.0, 0.02, 20, 0.47, DISCOUNT_RATE)  # PEM
FUEL_CELL_HIGH = StorageComponentSpec("discharger", 423.0, 0.03, 20, 0.58, DISCOUNT_RATE)  # solid oxide
H2_TANK = StorageComponentSpec("store", 8.4, 0.0, 20, 1.0, DISCOUNT_RATE)

# one inverter acts as charger and discharger; 90 % each way
BATTERY_INVERTER_CHARGE = StorageComponentSpec("charger", 209.0, 0.03, 10, 0.90, DISCOUNT_RATE)
BATTERY_INVERTER_DISCHARGE = StorageComponentSpec("discharger", 209.0, 0.03, 10, 0.90, DISCOUNT_RATE)
BATTERY_CELLS = StorageComponentSpec("store", 188.0, 0.0, 10, 1.0, DISCOUNT_RATE)

H2_LOW = {"charger": ELECTROLYSER_LOW, "store": H2_TANK, "discharger": FUEL_CELL_LOW}
H2_HIGH = {"charger": ELECTROLYSER_HIGH, "store": H2_TANK, "discharger": FUEL_CELL_HIGH}
BATTERY = {"charger": BATTERY_INVERTER_CHARGE, "store": BATTERY_CELLS, "discharger": BATTERY_INVERTER_DISCHARGE}

# discharge ratio [h], electricity price [EUR/MWh], yearly full-load hours [h]
LCOS_INPUTS = {
    "h2_low": {"components": H2_LOW, "discharge_ratio_hours": 100.0, "electricity_price": 50.0, "full_load_hours": 2500.0},
    "h2_high": {"components": H2_HIGH, "discharge_ratio_hours": 100.0, "electricity_price": 50.0, "full_load_hours": 2500.0},
    "battery": {"components": BATTERY, "discharge_ratio_hours": 4.0, "electricity_price": 50.0, "full_load_hours": 3400.0},
}

# published values, EUR/kWh and roundtrip fractions
PUBLISHED_STATIC_LCOS = {"h2_low": 0.21, "h2_high": 0.26, "battery": 0.12}
PUBLISHED_ROUNDTRIP = {"h2_low": 0.320, "h2_high": 0.458, "battery": 0.810}
