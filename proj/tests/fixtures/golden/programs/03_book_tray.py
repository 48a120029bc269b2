object_set = scene()
table_set = filter(object_set=object_set, category="table")
table_left_set = relate_agent(object_set=table_set, relation="left")
objects_on_table = set()
for table in table_left_set:
    objects_on_table.update(relate(object_set=object_set, reference_object=table, relation="on"))
objects_on_table_category = []
for obj in objects_on_table:
    objects_on_table_category.append(obj.category)
print(f"Objects on top of the table on my left: {objects_on_table_category}")
